"""The seven company risk factors and per-sample label sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class RiskFactor(str, Enum):
    """Closed set of seven risk-factor categories, in canonical order."""

    SUPPLY_CHAIN_AND_PRODUCT = "supply_chain_and_product"
    PEOPLE_AND_MANAGEMENT = "people_and_management"
    FINANCE = "finance"
    LEGAL_AND_REGULATIONS = "legal_and_regulations"
    MACRO = "macro"
    COMPETITION = "competition"
    MARKETS_AND_CONSUMERS = "markets_and_consumers"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def short_code(self) -> str:
        return _SHORT_CODES[self]

    @property
    def description(self) -> str:
        """Definition used in annotation guidance and classification prompts."""
        return _DESCRIPTIONS[self]


#: Canonical factor ordering shared by every model, report and wire format.
CANONICAL_ORDER: tuple[RiskFactor, ...] = tuple(RiskFactor)

_DISPLAY_NAMES = {
    RiskFactor.SUPPLY_CHAIN_AND_PRODUCT: "Supply Chain and Product",
    RiskFactor.PEOPLE_AND_MANAGEMENT: "People and Management",
    RiskFactor.FINANCE: "Finance",
    RiskFactor.LEGAL_AND_REGULATIONS: "Legal and Regulations",
    RiskFactor.MACRO: "Macro",
    RiskFactor.COMPETITION: "Competition",
    RiskFactor.MARKETS_AND_CONSUMERS: "Markets and Consumers",
}

_SHORT_CODES = {
    RiskFactor.SUPPLY_CHAIN_AND_PRODUCT: "Supp",
    RiskFactor.PEOPLE_AND_MANAGEMENT: "Mgmt",
    RiskFactor.FINANCE: "Fin",
    RiskFactor.LEGAL_AND_REGULATIONS: "Legal",
    RiskFactor.MACRO: "Macro",
    RiskFactor.COMPETITION: "Comp",
    RiskFactor.MARKETS_AND_CONSUMERS: "Mrkt",
}

_DESCRIPTIONS = {
    RiskFactor.SUPPLY_CHAIN_AND_PRODUCT: (
        "Risks associated with the company's supply chain, manufacturing, "
        "product or core technology"
    ),
    RiskFactor.PEOPLE_AND_MANAGEMENT: (
        "Risks regarding a company's internal operations such as layoffs, "
        "departures of top management, or specific operation strategies"
    ),
    RiskFactor.FINANCE: (
        "Risks related to the finances of a company such as cash flow, "
        "fund procurement, investments, and profits"
    ),
    RiskFactor.LEGAL_AND_REGULATIONS: (
        "Risks induced by potential policy changes, pressure from "
        "regulations or lawsuits"
    ),
    RiskFactor.MACRO: (
        "Risks caused by the macro socio-economic environment such as "
        "inflation, pandemics or a financial crisis"
    ),
    RiskFactor.COMPETITION: "Risks from a company's competitors in the market",
    RiskFactor.MARKETS_AND_CONSUMERS: (
        "Risks or challenges from the market or consumer sales"
    ),
}


@dataclass(frozen=True)
class RiskLabelSet:
    """Seven independent binary flags, one per risk factor.

    The all-false set is the valid "no risk" state.
    """

    flags: tuple[bool, ...] = field(default=(False,) * 7)

    def __post_init__(self) -> None:
        if len(self.flags) != len(CANONICAL_ORDER):
            raise ValueError(f"expected 7 flags, got {len(self.flags)}")
        object.__setattr__(self, "flags", tuple(bool(f) for f in self.flags))

    @classmethod
    def from_positive(cls, factors) -> "RiskLabelSet":
        positive = set(factors)
        return cls(tuple(f in positive for f in CANONICAL_ORDER))

    @classmethod
    def from_mapping(cls, mapping) -> "RiskLabelSet":
        """Build from a {factor value/name: bool} mapping; missing keys are false."""
        flags = []
        by_value = {f.value: f for f in CANONICAL_ORDER}
        normalized = {}
        for key, val in mapping.items():
            factor = key if isinstance(key, RiskFactor) else by_value.get(str(key))
            if factor is None:
                raise ValueError(f"unknown risk factor: {key!r}")
            normalized[factor] = bool(val)
        for factor in CANONICAL_ORDER:
            flags.append(normalized.get(factor, False))
        return cls(tuple(flags))

    def __getitem__(self, factor: RiskFactor) -> bool:
        return self.flags[CANONICAL_ORDER.index(factor)]

    def positives(self) -> tuple[RiskFactor, ...]:
        return tuple(f for f, on in zip(CANONICAL_ORDER, self.flags) if on)

    @property
    def is_no_risk(self) -> bool:
        return not any(self.flags)

    def to_mapping(self) -> dict[str, bool]:
        return {f.value: on for f, on in zip(CANONICAL_ORDER, self.flags)}
