from django.apps import AppConfig


class BerezinConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'berezin'
    verbose_name = 'Berezin measures'
