from django.apps import AppConfig


class SpinlabConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "spinlab"
    verbose_name = "Spin system lab"
