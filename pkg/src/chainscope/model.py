"""Domain types and taxonomies for city-level ownership analysis.

Cities carry a 2011 population and derive a size class from it; countries
map to one of four macro-regions; firms carry one of nine aggregated
activity sectors. Ownership links carry a participation rate and a FORCE
income-intensity value derived from the owned firm's turnover.

All types are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import UnknownCountry, ZeroTurnover


class SizeClass(Enum):
    SMALL = "SMALL"
    MEDIUM = "MEDIUM"
    LARGE = "LARGE"
    UNCLASSIFIED = "UNCLASSIFIED"


class Region(Enum):
    CEE = "CEE"
    EU_NON_CEE = "EU_NON_CEE"
    POST_COMMUNIST = "POST_COMMUNIST"
    OUTSIDE_EUROPE = "OUTSIDE_EUROPE"


class Sector(Enum):
    AUTOMOTIVE = "AUTOMOTIVE"
    FINANCE = "FINANCE"
    IT = "IT"
    INDUSTRY = "INDUSTRY"
    MEDIA = "MEDIA"
    REAL_ESTATE = "REAL_ESTATE"
    SALES = "SALES"
    SERVICES = "SERVICES"
    ENERGY = "ENERGY"


# The eight post-communist EU members whose cities anchor every chain.
CEE_COUNTRIES = frozenset({"BG", "HR", "CZ", "HU", "PL", "SK", "SI", "RO"})

# Population thresholds (inhabitants, 2011).
SMALL_CITY_FLOOR = 10_000
MEDIUM_CITY_FLOOR = 50_000
LARGE_CITY_FLOOR = 250_000  # large means strictly above this


def classify_city_size(population: int) -> SizeClass:
    """Size class for a 2011 population count.

    LARGE > 250,000; MEDIUM in [50,000, 250,000]; SMALL in
    [10,000, 50,000); below 10,000 the settlement is outside the city
    universe and stays UNCLASSIFIED.
    """
    if population < 0:
        raise ValueError(f"population must be non-negative, got {population}")
    if population > LARGE_CITY_FLOOR:
        return SizeClass.LARGE
    if population >= MEDIUM_CITY_FLOOR:
        return SizeClass.MEDIUM
    if population >= SMALL_CITY_FLOOR:
        return SizeClass.SMALL
    return SizeClass.UNCLASSIFIED


@dataclass(frozen=True)
class RegionTaxonomy:
    """Country code -> macro-region mapping, validated on construction.

    The CEE bucket must contain exactly the eight member countries;
    anything else silently corrupts orientation shares downstream.
    """

    regions: Mapping[str, Region]

    def __post_init__(self):
        cee = {c for c, r in self.regions.items() if r is Region.CEE}
        if cee != CEE_COUNTRIES:
            missing = sorted(CEE_COUNTRIES - cee)
            extra = sorted(cee - CEE_COUNTRIES)
            raise ValueError(
                "taxonomy CEE set must be exactly the eight members; "
                f"missing={missing} extra={extra}"
            )

    def region_of(self, country: str) -> Region:
        try:
            return self.regions[country]
        except KeyError:
            raise UnknownCountry(country) from None

    def __contains__(self, country: str) -> bool:
        return country in self.regions

    @property
    def countries(self) -> frozenset[str]:
        return frozenset(self.regions)


def classify_region(country: str, taxonomy: RegionTaxonomy) -> Region:
    """Region of a country code; raises UnknownCountry when absent."""
    return taxonomy.region_of(country)


# FORCE modes: the literal participation/turnover ratio is the default;
# the product form (attributable revenue) is selectable in configuration.
FORCE_MODE_RATIO = "literal_ab_ratio"
FORCE_MODE_PRODUCT = "product"
FORCE_MODES = (FORCE_MODE_RATIO, FORCE_MODE_PRODUCT)


def compute_force(participation_rate: float, turnover: float,
                  mode: str = FORCE_MODE_RATIO) -> float:
    """FDI income-intensity of one ownership link.

    Default mode divides the participation rate by the owned firm's
    turnover; 'product' multiplies them instead. Zero participation
    yields zero intensity in either mode; a positive participation in a
    zero-turnover firm leaves the ratio undefined.
    """
    if not 0.0 <= participation_rate <= 1.0:
        raise ValueError(
            f"participation_rate must be in [0, 1], got {participation_rate}")
    if turnover < 0:
        raise ValueError(f"turnover must be non-negative, got {turnover}")
    if mode not in FORCE_MODES:
        raise ValueError(f"unknown FORCE mode {mode!r}")
    if participation_rate == 0.0:
        return 0.0
    if mode == FORCE_MODE_PRODUCT:
        return participation_rate * turnover
    if turnover == 0.0:
        raise ZeroTurnover(
            f"participation {participation_rate} in a zero-turnover firm")
    return participation_rate / turnover


@dataclass(frozen=True)
class City:
    id: str
    name: str
    country: str  # ISO-3166 alpha-2
    population_2011: int

    def __post_init__(self):
        if self.population_2011 < 0:
            raise ValueError(f"city {self.id}: negative population")

    @property
    def size_class(self) -> SizeClass:
        return classify_city_size(self.population_2011)


@dataclass(frozen=True)
class Firm:
    id: str
    name: str
    city_id: str
    sector: Sector
    turnover: float  # EUR

    def __post_init__(self):
        if self.turnover < 0:
            raise ValueError(f"firm {self.id}: negative turnover")


@dataclass(frozen=True)
class OwnershipLink:
    owner_firm_id: str
    owned_firm_id: str
    participation_rate: float  # fraction of capital, [0, 1]
    force: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.owner_firm_id == self.owned_firm_id:
            raise ValueError(
                f"link {self.owner_firm_id}: a firm cannot own itself")
        if not 0.0 <= self.participation_rate <= 1.0:
            raise ValueError(
                f"link {self.owner_firm_id}->{self.owned_firm_id}: "
                f"participation {self.participation_rate} outside [0, 1]")
