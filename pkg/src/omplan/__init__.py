"""Ontology-mediated planning: compile PDDL + ALCQ ontologies into plain PDDL."""

__version__ = "0.1.0"
