"""Analysis results as data: ingest ADaM datasets, run standardized
analyses, store every statistic in a relational results model and render
products from the stored results."""

__version__ = "0.1.0"
