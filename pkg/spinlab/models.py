from django.db import models


class SavedReport(models.Model):
    """A run report kept with ``--save``."""

    command = models.CharField(max_length=50)
    inputs = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    results = models.JSONField(default=dict)
    version = models.CharField(max_length=20)
    wall_time = models.FloatField(default=0.0)
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ("-created",)

    def __str__(self) -> str:
        return f"{self.command} (seed {self.seed})"
