import numpy as np

DEFAULT_THRESHOLD = 12.0


def detect_scenes(seq, threshold: float = DEFAULT_THRESHOLD) -> list[tuple[int, int]]:
    """Cut wherever the mean absolute luma difference between neighbours
    exceeds ``threshold``; returns ``[start, end)`` ranges covering every frame.

    ``seq`` is a :class:`~vidmark.media_io.VideoSequence` or any iterable of
    luma arrays.
    """
    if hasattr(seq, "frames"):
        lumas = [f.y.samples for f in seq.frames]
    else:
        lumas = list(seq)
    if not lumas:
        return []
    cuts = [0]
    prev = np.asarray(lumas[0], dtype=np.int16)
    for t in range(1, len(lumas)):
        cur = np.asarray(lumas[t], dtype=np.int16)
        if np.abs(cur - prev).mean() > threshold:
            cuts.append(t)
        prev = cur
    cuts.append(len(lumas))
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:])]
