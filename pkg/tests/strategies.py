import numpy as np
from hypothesis import strategies as st

from deltalab.density import renormalize_bins


@st.composite
def histograms(draw, max_bins=8):
    m = draw(st.integers(1, max_bins))
    start = draw(st.floats(0.0, 2.0))
    widths = draw(st.lists(st.floats(0.01, 2.0), min_size=m, max_size=m))
    # tiny heights are snapped to zero gaps; subnormal bins only exercise rounding noise
    raw = draw(st.lists(st.floats(0.0, 10.0), min_size=m, max_size=m).filter(lambda h: max(h) > 0.01))
    heights = [h if h >= 1e-3 else 0.0 for h in raw]
    edges = start + np.concatenate([[0.0], np.cumsum(widths)])
    return renormalize_bins(edges, heights)
