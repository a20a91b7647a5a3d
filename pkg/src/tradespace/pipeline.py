"""Indicator-set orchestration: compute any subset of the fifteen indicator
matrices for one baseline year from its binary RCA matrix."""

from __future__ import annotations

from typing import Iterable

from . import combined_space as cs
from . import country_space as cys
from . import product_space as ps
from .errors import BadFlag
from .rca import BinaryRca, compute_anti_rca
from .product_space import IndicatorMatrix

PRODUCT_SPACE_IDS = ("D", "Dtilde", "E", "E1", "E2")
COUNTRY_SPACE_IDS = ("Dstar", "DtildeStar", "Estar", "E1star", "E2star")
COMBINED_SPACE_IDS = ("Dtot", "DtildeTot", "Etot", "E1tot", "E2tot")
ALL_INDICATOR_IDS = PRODUCT_SPACE_IDS + COUNTRY_SPACE_IDS + COMBINED_SPACE_IDS

# the twelve indicators the predictive tests run on (autonomous parts excluded)
HEADLINE_IDS = tuple(i for i in ALL_INDICATOR_IDS if not i.startswith("E1"))

SPACE_FAMILY = {
    **{i: "product" for i in PRODUCT_SPACE_IDS},
    **{i: "country" for i in COUNTRY_SPACE_IDS},
    **{i: "combined" for i in COMBINED_SPACE_IDS},
}


def parse_indicator_ids(spec: str | Iterable[str]) -> tuple[str, ...]:
    """Parse an id list; 'all' expands to the fifteen ids, 'headline' to twelve."""
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s]
    out: list[str] = []
    for item in spec:
        if item == "all":
            out.extend(ALL_INDICATOR_IDS)
        elif item == "headline":
            out.extend(HEADLINE_IDS)
        elif item in ALL_INDICATOR_IDS:
            out.append(item)
        else:
            raise BadFlag(f"unknown indicator id {item!r}")
    seen: dict[str, None] = {}
    for item in out:
        seen.setdefault(item)
    return tuple(seen)


def compute_indicators(
    x: BinaryRca, ids: Iterable[str] = ALL_INDICATOR_IDS
) -> dict[str, IndicatorMatrix]:
    """Compute the requested indicator matrices, sharing intermediates.

    The m x m product-side matrices dominate memory; they are built once and
    released with this call's frame.
    """
    ids = parse_indicator_ids(ids) if not isinstance(ids, tuple) else ids
    for i in ids:
        if i not in ALL_INDICATOR_IDS:
            raise BadFlag(f"unknown indicator id {i!r}")
    z = compute_anti_rca(x)
    out: dict[str, IndicatorMatrix] = {}

    need_product = any(SPACE_FAMILY[i] == "product" for i in ids)
    need_country = any(SPACE_FAMILY[i] == "country" for i in ids)
    need_combined = any(SPACE_FAMILY[i] == "combined" for i in ids)

    c = b = cmin = bmin = None
    if need_product or need_combined:
        c = ps.cooccurrence_prob(x)
        b = ps.exclusion_prob(x, z)
        cmin = ps.min_symmetrized(c)
        bmin = ps.min_symmetrized(b)
    if need_product:
        if "D" in ids:
            out["D"] = ps.density(x, cmin)
        if "Dtilde" in ids:
            out["Dtilde"] = ps.extended_density(x, z, cmin, bmin)
        if {"E", "E1", "E2"} & set(ids):
            total, auto, path = ps.specialization_prob(x, z, c, b)
            out.update({"E": total, "E1": auto, "E2": path})

    cstar = bstar = cstar_min = bstar_min = None
    if need_country or need_combined:
        cstar = cys.country_cooccurrence_prob(x)
        bstar = cys.country_exclusion_prob(x, z)
        cstar_min = ps.min_symmetrized(cstar)
        bstar_min = ps.min_symmetrized(bstar)
    if need_country:
        if "Dstar" in ids:
            out["Dstar"] = cys.country_density(x, cstar_min)
        if "DtildeStar" in ids:
            out["DtildeStar"] = cys.country_extended_density(x, z, cstar_min, bstar_min)
        if {"Estar", "E1star", "E2star"} & set(ids):
            total, auto, path = cys.country_specialization_prob(x, z, cstar, bstar)
            out.update({"Estar": total, "E1star": auto, "E2star": path})

    if need_combined:
        k = ps.marginal_prob(c, b)
        kstar = ps.marginal_prob(cstar, bstar)
        if "Dtot" in ids:
            out["Dtot"] = cs.combined_density(x, cmin, cstar_min)
        if "DtildeTot" in ids:
            out["DtildeTot"] = cs.combined_extended_density(
                x, z, cmin, bmin, cstar_min, bstar_min
            )
        if {"Etot", "E1tot", "E2tot"} & set(ids):
            total, auto, path = cs.combined_specialization_prob(x, b, k, bstar, kstar)
            out.update({"Etot": total, "E1tot": auto, "E2tot": path})

    return {i: out[i] for i in ids if i in out}
