from experiments.management.base import ExperimentCommand
from experiments.reports import run_ser


class Command(ExperimentCommand):
    help = "SER versus Es/N0 through a soft limiter and AWGN"
    experiment = staticmethod(run_ser)
