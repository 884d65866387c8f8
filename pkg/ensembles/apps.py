from django.apps import AppConfig


class EnsemblesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ensembles'
    verbose_name = 'Gaussian symmetric-space ensembles'
