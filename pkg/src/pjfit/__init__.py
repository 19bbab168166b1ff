"""Person-job fit ranking engine.

Scores candidate-job pairs with bilateral historical-interaction encoders
and a category-aware mixture-of-experts head, trained pairwise. Ships the
evaluation metrics, a job-description augmentation pipeline with a pluggable
completion client, and a seeded synthetic dataset generator.
"""

__version__ = "0.1.0"
