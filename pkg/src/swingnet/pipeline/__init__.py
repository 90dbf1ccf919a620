"""Tweet-corpus pipeline: ingest, state association, networks, filtering and report."""
from .bots import BotClass, BotClassification, classify_bots
from .domains import DomainTagger, ReputationTag, extract_domain, tag_domain
from .networks import Networks, build_networks, filter_validated
from .records import TweetRecord, ingest_tweets
from .report import ReportTables, report
from .run import PipelineConfig, run_pipeline
from .states import AMBIGUOUS, DEFAULT_STATES, StateConfig, associate_state, filter_language

__all__ = [
    "AMBIGUOUS", "DEFAULT_STATES", "BotClass", "BotClassification", "DomainTagger", "Networks", "PipelineConfig",
    "ReportTables", "ReputationTag", "StateConfig", "TweetRecord", "associate_state", "build_networks",
    "classify_bots", "extract_domain", "filter_language", "filter_validated", "ingest_tweets", "report",
    "run_pipeline", "tag_domain",
]
