from experiments.management.base import ExperimentCommand
from experiments.reports import run_covcheck


class Command(ExperimentCommand):
    help = "Power covariance of neighbouring samples vs closed form"
    experiment = staticmethod(run_covcheck)
