from experiments.management.base import ExperimentCommand
from experiments.reports import run_complexity


class Command(ExperimentCommand):
    help = "NWCS evaluation counts per iteration and per block"
    experiment = staticmethod(run_complexity)
