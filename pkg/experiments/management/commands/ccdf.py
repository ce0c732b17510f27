from experiments.management.base import ExperimentCommand
from experiments.reports import run_ccdf


class Command(ExperimentCommand):
    help = "PAPR CCDF of random blocks under the configured scheme"
    experiment = staticmethod(run_ccdf)
