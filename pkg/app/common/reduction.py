"""Root reduction: drop clusters of near-zero mass, then merge clusters whose
decoders nearly coincide. Works in decoder coordinates only."""
from dataclasses import dataclass, field

import numpy as np

from app.common.errors import EmptyRootError
from app.common.probability import DecoderRoot
from app.common.utils import setting


@dataclass(frozen=True)
class ReductionReport:
    root: DecoderRoot
    removed: list = field(default_factory=list)
    merged: list = field(default_factory=list)

    @property
    def changed(self):
        return bool(self.removed or self.merged)


def _check_threshold(name, value):
    if not 0 < value < 1:
        raise ValueError("{} must lie in (0, 1), got {!r}".format(name, value))


def reduce_root(root, delta1=None, delta2=None):
    """Reduces a decoder root.

    Clusters with mass below delta1 are deleted and the marginal renormalized.
    Pairs whose decoders are within delta2 in L-infinity are then merged into the
    lower index, which keeps its decoder and takes the summed mass. Pairs are
    scanned in ascending order and the scan restarts after every merge.
    Indices in `removed` refer to the input root; pairs in `merged` to the
    root as it stood when the merge happened."""
    delta1 = setting(delta1, 'REDUCTION_DELTA1')
    delta2 = setting(delta2, 'REDUCTION_DELTA2')
    _check_threshold('delta1', delta1)
    _check_threshold('delta2', delta2)

    keep = root.marginal >= delta1
    removed = [int(i) for i in np.flatnonzero(~keep)]
    if not keep.any():
        raise EmptyRootError("Every cluster has mass below delta1={}".format(delta1))
    decoders = [root.decoders[:, i] for i in np.flatnonzero(keep)]
    masses = [float(m) for m in root.marginal[keep]]

    merged = []
    found = True
    while found:
        found = False
        for i in range(len(masses)):
            for j in range(i + 1, len(masses)):
                if np.max(np.abs(decoders[i] - decoders[j])) < delta2:
                    masses[i] += masses.pop(j)
                    decoders.pop(j)
                    merged.append((i, j))
                    found = True
                    break
            if found:
                break

    if not removed and not merged:
        return ReductionReport(root=root)
    reduced = DecoderRoot.normalized(np.stack(decoders, axis=1), np.array(masses), root.beta)
    return ReductionReport(root=reduced, removed=removed, merged=merged)


def effective_cardinality(root, delta1=None, delta2=None):
    return reduce_root(root, delta1, delta2).root.n_clusters
