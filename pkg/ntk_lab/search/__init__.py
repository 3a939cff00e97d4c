from .scorers import BaseScorer, BenchmarkScorer, Evaluation, LgaScorer
from .search import LogEntry, SearchConfig, SearchResult, random_search, regularized_evolution
