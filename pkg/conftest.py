import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "papr_lab.settings")
django.setup()
