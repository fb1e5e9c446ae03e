# Generated by Django 5.2.6 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SavedReport",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("command", models.CharField(max_length=50)),
                ("inputs", models.JSONField(default=dict)),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                ("results", models.JSONField(default=dict)),
                ("version", models.CharField(max_length=20)),
                ("wall_time", models.FloatField(default=0.0)),
                ("created", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ("-created",),
            },
        ),
    ]
