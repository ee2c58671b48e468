"""Datasource adapters: ontology dump, knowledge-base API, chat models."""
