"""disto: distributed automata on finite labeled digraphs, their logics,
and the decision procedures connecting them."""

__version__ = "0.1.0"
