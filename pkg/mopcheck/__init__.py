"""mopcheck -- exact engine for matrix orthogonal polynomials and the algebra D(W)."""

__version__ = "0.1.0"
