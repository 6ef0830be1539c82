"""Published reference values for the 2013 CEE ownership-network snapshot.

The original analysis ran on a proprietary ORBIS extraction (a sample of
the 3,000 biggest parent companies), so these numbers cannot be
recomputed from synthetic fixtures. They are shipped as documentation
constants and as loadable inputs: the size-by-orientation counts form a
real contingency table that exercises the correspondence-analysis path
end to end.
"""

from __future__ import annotations

import numpy as np

from .ca import ContingencyTable
from .model import Region

# City universe of the 2011 population census, by size class.
CITY_COUNTS_2011 = {"LARGE": 29, "MEDIUM": 185, "SMALL": 620}

# Share of N-2 links by terminal orientation.
ORIENTATION_LINK_SHARES = {
    Region.CEE: 0.62,
    Region.EU_NON_CEE: 0.26,
    Region.POST_COMMUNIST: 0.08,
    Region.OUTSIDE_EUROPE: 0.04,
}

# (nodes, links) of the four orientation-filtered city graphs.
ORIENTATION_GRAPH_SIZES = {
    Region.CEE: (167, 456),
    Region.EU_NON_CEE: (69, 205),
    Region.POST_COMMUNIST: (40, 60),
    Region.OUTSIDE_EUROPE: (16, 20),
}

# Chain-morphology census: 125 chain graphs in total; only the two
# dominant classes were reported.
CHAIN_CENSUS_TOTAL = 125
CHAIN_CENSUS_SIMPLE = 73
CHAIN_CENSUS_HIERARCHICAL_Y = 46

# First two factorial axes of the city-by-structure analysis.
STRUCTURE_CA_FIRST_TWO_AXES_SHARE = 0.748

# Counts of N-1 cities by size class against the orientation of the
# N-2 link (columns: EU outside CEE, CEE, post-communist, outside
# Europe).
SIZE_BY_ORIENTATION_COLUMNS = ("EU", "CEE", "PC", "OE")
SIZE_BY_ORIENTATION_ROWS = ("SMALL", "MEDIUM", "LARGE")
SIZE_BY_ORIENTATION_COUNTS = (
    (47, 56, 50, 14),
    (24, 29, 10, 0),
    (29, 15, 40, 86),
)

# Row percentages of N-1 city size per chain-structure class.
STRUCTURE_BY_SIZE_COLUMNS = ("SMALL", "MEDIUM", "LARGE")
STRUCTURE_BY_SIZE_PERCENT = {
    "SIMPLE": (69, 28, 4),
    "HIERARCHICAL_Y": (86, 14, 0),
    "POLYGON": (0, 0, 100),
    "STAR": (0, 0, 100),
    "COMPLEX_HIERARCHICAL": (0, 29, 71),
    "MULTIGROUP": (39, 22, 39),
}

# Row percentages of host-city size per N-2 firm sector, plus the
# mono-/pluri-sectoral split of the profiled cities.
SECTOR_BY_SIZE_COLUMNS = ("SMALL", "MEDIUM", "LARGE")
SECTOR_BY_SIZE_PERCENT = {
    "AUTOMOTIVE": (14, 14, 72),
    "FINANCE": (9, 18, 73),
    "IT": (0, 50, 50),
    "INDUSTRY": (53, 20, 27),
    "MEDIA": (8, 17, 75),
    "REAL_ESTATE": (0, 0, 100),
    "SALES": (50, 21, 29),
    "SERVICES": (29, 14, 57),
    "ENERGY": (33.3, 33.3, 33.3),
}
SECTORAL_MODE_PERCENT = {
    "MONO_SECTORAL": (65, 24, 11),
    "PLURI_SECTORAL": (0, 27, 73),
}


def size_by_orientation_table() -> ContingencyTable:
    """The size-by-orientation counts as a fit-ready contingency table."""
    return ContingencyTable(
        SIZE_BY_ORIENTATION_ROWS,
        SIZE_BY_ORIENTATION_COLUMNS,
        np.array(SIZE_BY_ORIENTATION_COUNTS, dtype=np.int64),
    )
