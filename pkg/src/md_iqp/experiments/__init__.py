"""Reproducible experiment pipelines: registry, configs and the run-directory writer."""
