"""Semidefinite programs via triangular low-rank factorization and Newton-KKT SQP."""
__version__ = "0.1.0"
