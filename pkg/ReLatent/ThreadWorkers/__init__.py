__all__ = ['LatentLearner', 'RedundancySweep']

from . import LatentLearner, RedundancySweep
