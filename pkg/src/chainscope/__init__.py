"""chainscope: transnational corporate-ownership chains over city networks.

The library decomposes firm-level capital-control links into three-level
chains anchored on CEE cities, aggregates them into directed city
multigraphs, and provides the analysis battery used on such networks:
degree/betweenness centrality, chain-morphology classification, and
correspondence factor analysis of city cross-tabulations.
"""

__version__ = "0.1.0"

from .model import (
    CEE_COUNTRIES,
    City,
    Firm,
    OwnershipLink,
    Region,
    RegionTaxonomy,
    Sector,
    SizeClass,
    classify_city_size,
    classify_region,
    compute_force,
)
from .ingest import (
    Dataset,
    generate_fixture,
    load_dataset,
    load_dataset_dir,
    write_dataset,
)
from .chains import (
    Chain,
    ChainDecomposition,
    AggregatedChainGroup,
    aggregate_by_n1,
    build_chains,
    classify_orientation,
    filter_transnational,
    orientation_shares,
)
from .citygraph import CityGraph, build_graph, export_graph, import_graph
from .metrics import (
    CentralityReport,
    betweenness,
    betweenness_oracle,
    centrality_report,
    degrees,
    gateway_profile,
)
from .morphology import (
    MorphologyCensus,
    StructureClass,
    census,
    classify_structure,
    structure_by_size,
)
from .ca import CAResult, ContingencyTable, axis_report, cross_tab, fit_ca
from .report import RunConfig, run_pipeline
