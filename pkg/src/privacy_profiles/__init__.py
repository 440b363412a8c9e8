"""Privacy-profile engine: cluster questionnaire behavior, classify users
into profiles, and recommend their missing settings."""

from .backend import BACKEND
from .classifier import TrainConfig, gradient_check, load_model, predict_label, predict_scores, save_model, train
from .clustering import brute_force_kmedoids, compactness, kmedoids, label_agreement, silhouette
from .corpus import (
    Dataset,
    QuestionCatalog,
    generate_synthetic,
    kfold_split,
    load_dataset,
    load_taxonomy,
    mask_settings,
    reference_catalog,
    select_subset,
)
from .recommender import RatingsMatrix, predict_rating, recommend_top_n, top_similar_users
from .similarity import cosine, distance_matrix, similarity_matrix, tfidf_weights

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Dataset",
    "QuestionCatalog",
    "RatingsMatrix",
    "TrainConfig",
    "__version__",
    "brute_force_kmedoids",
    "compactness",
    "cosine",
    "distance_matrix",
    "generate_synthetic",
    "gradient_check",
    "kfold_split",
    "kmedoids",
    "label_agreement",
    "load_dataset",
    "load_model",
    "load_taxonomy",
    "mask_settings",
    "predict_label",
    "predict_rating",
    "predict_scores",
    "recommend_top_n",
    "reference_catalog",
    "save_model",
    "select_subset",
    "silhouette",
    "similarity_matrix",
    "tfidf_weights",
    "top_similar_users",
    "train",
]
