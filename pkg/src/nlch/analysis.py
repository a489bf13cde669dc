"""Morphology of phase fields on the periodic grid."""
import numpy as np
from scipy import ndimage


def periodic_labels(mask: np.ndarray):
    """Connected components (4-neighbour) of ``mask`` on the torus.

    Returns ``(labels, count)`` with labels renumbered 1..count.
    """
    labels, n = ndimage.label(mask)
    if n == 0:
        return labels, 0
    parent = np.arange(n + 1)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def join(edge_a, edge_b):
        for a, b in zip(edge_a, edge_b):
            if a and b:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    join(labels[0, :], labels[-1, :])
    join(labels[:, 0], labels[:, -1])
    roots = np.array([find(a) for a in range(n + 1)])
    uniq, relabel = np.unique(roots, return_inverse=True)
    out = relabel[labels]  # background root 0 maps to 0
    return out, len(uniq) - 1


def count_components(phi: np.ndarray, sign: int = 1) -> int:
    mask = phi > 0 if sign > 0 else phi < 0
    return periodic_labels(mask)[1]


def enclosed_phase(phi: np.ndarray):
    """Sign (+1/-1) of the phase that forms isolated inclusions, or ``None``.

    The matrix phase contains a full grid row and a full grid column (it wraps
    around the torus in both directions); the enclosed phase contains neither.
    Stripes, uniform fields and other ambiguous layouts return ``None``.
    """
    pos, neg = phi > 0, phi < 0

    def spans(mask):
        return bool(np.any(mask.all(axis=1))) and bool(np.any(mask.all(axis=0)))

    def touches_line(mask):
        return bool(np.any(mask.all(axis=1))) or bool(np.any(mask.all(axis=0)))

    if not pos.any() or not neg.any():
        return None
    if spans(neg) and not touches_line(pos):
        return 1
    if spans(pos) and not touches_line(neg):
        return -1
    return None
