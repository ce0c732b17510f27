from experiments.management.base import ExperimentCommand
from experiments.reports import run_power


class Command(ExperimentCommand):
    help = "Average transmit power increase introduced by TI"
    experiment = staticmethod(run_power)
