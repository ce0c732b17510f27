import logging
from dataclasses import replace

from django.core.management.base import BaseCommand, CommandError

from experiments.config import ConfigError, ExperimentConfig
from experiments.config_file import load
from experiments.csv_output import write_report
from experiments.serializers import MAX_SEED

logger = logging.getLogger(__name__)


class ExperimentCommand(BaseCommand):
    """
    Common flags of the experiment commands; subclasses set ``experiment``
    to a function (config, workers) -> Report.
    """

    experiment = None

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            dest="config_path",
            help="INI experiment file; settings defaults when omitted",
        )
        parser.add_argument(
            "--seed", type=int, help="Master seed (unsigned 64-bit)"
        )
        parser.add_argument(
            "--out", help="CSV output path; stdout when omitted"
        )
        parser.add_argument(
            "--workers", type=int, default=1, help="Worker processes"
        )

    def load_config(self, options) -> ExperimentConfig:
        config = ExperimentConfig.from_settings()
        if options.get("config_path"):
            config = load(options["config_path"], config)
        overrides = {}
        if options.get("seed") is not None:
            if not 0 <= options["seed"] <= MAX_SEED:
                raise ConfigError({"seed": ["must be an unsigned 64-bit int"]})
            overrides["seed"] = options["seed"]
        if options.get("out"):
            overrides["output"] = options["out"]
        if overrides:
            config = replace(config, **overrides)
        return config

    def handle(self, *args, **options):
        if options["workers"] < 1:
            raise CommandError("--workers must be >= 1")
        try:
            config = self.load_config(options)
            report = self.experiment(config, options["workers"])
        except (ConfigError, ValueError) as error:
            raise CommandError(str(error)) from error

        if config.output:
            with open(config.output, "w", encoding="utf-8", newline="") as out:
                write_report(report, out)
            logger.info("Wrote %d rows to %s", len(report.rows), config.output)
        else:
            write_report(report, self.stdout)
