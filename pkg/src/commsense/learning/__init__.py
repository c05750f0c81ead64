"""From-scratch PCA and one-vs-one SMO SVM used to classify CSI."""
from .evaluation import AccuracyReport, confusion_report, evaluate_accuracy, silhouette_score
from .pca import PcaModel, pca_fit, pca_project
from .persistence import load_model, model_from_dict, model_to_dict, save_model
from .svm import (BinaryMachine, SvmModel, SvmParams, kkt_violations, smo_solve, svm_decision_values,
                  svm_predict, svm_train, vote)

__all__ = [
    "AccuracyReport",
    "BinaryMachine",
    "PcaModel",
    "SvmModel",
    "SvmParams",
    "confusion_report",
    "evaluate_accuracy",
    "kkt_violations",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "pca_fit",
    "pca_project",
    "save_model",
    "silhouette_score",
    "smo_solve",
    "svm_decision_values",
    "svm_predict",
    "svm_train",
    "vote",
]
