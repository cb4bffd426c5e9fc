"""Harvesting protocol: data-provider endpoint and harvester client."""

from olacat.oai.provider import (
    DataProvider,
    InMemorySource,
    ProviderIdentity,
    RecordHeader,
)
from olacat.oai.harvester import (
    HarvestWindow,
    ProtocolError,
    ProviderUnreachable,
    harvest,
    identify,
    probe_provider,
)

__all__ = [
    "DataProvider",
    "InMemorySource",
    "ProviderIdentity",
    "RecordHeader",
    "HarvestWindow",
    "ProtocolError",
    "ProviderUnreachable",
    "harvest",
    "identify",
    "probe_provider",
]
