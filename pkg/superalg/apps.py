from django.apps import AppConfig


class SuperalgConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'superalg'
    verbose_name = 'Grassmann and supermatrix kernel'
