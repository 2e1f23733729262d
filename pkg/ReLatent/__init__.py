"""
ReLatent: interpretable latent features of relational data, learned by clustering entities and relation facts under
alternating similarity interpretations.
"""
__version__ = '0.1.0'
__all__ = ['Errors', 'KnowledgeBase', 'NeighbourhoodTree', 'Similarity', 'Clustering', 'LatentFeatures',
           'Explanation', 'Analytics', 'Synthetic', 'Artifacts', 'ThreadWorkers']

from . import Errors, KnowledgeBase, NeighbourhoodTree, Similarity, Clustering, LatentFeatures, Explanation, \
    Analytics, Synthetic, Artifacts, ThreadWorkers
