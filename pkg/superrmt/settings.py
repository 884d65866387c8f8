#settings.py

"""
Django settings for superrmt project.

The project hosts the random-matrix / supersymmetry workbench: one app per
numerical module plus the ``workbench`` app that owns the command line and
the run ledger.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
import os
import dj_database_url
import environ
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    SUPERRMT_DEBUG=(bool, False),
    SUPERRMT_WORKERS=(int, 1),
    SUPERRMT_QUAD_RTOL=(float, 1e-8),
    SUPERRMT_LOG_LEVEL=(str, 'INFO'),
)

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SUPERRMT_SECRET_KEY', 'django-insecure-superrmt-local-workbench-key')

DEBUG = env('SUPERRMT_DEBUG')

ALLOWED_HOSTS = ['localhost', '127.0.0.1', 'testserver']


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'superalg',      # Grassmann / supermatrix kernel
    'ensembles',     # ten symmetry classes, sampling
    'spectral',      # level density, generating function
    'berezin',       # Berezin integrals with anomalies
    'verify',        # identity checks and suites
    'workbench',     # CLI + run ledger
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'superrmt.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'superrmt.wsgi.application'


# Database from .env, local sqlite otherwise

DATABASES = {
    'default': dj_database_url.config(default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}")
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

STATIC_URL = '/static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Workbench configuration

SUPERRMT_OUTPUT_DIR = Path(env('SUPERRMT_OUTPUT_DIR', default=str(BASE_DIR / 'runs')))
SUPERRMT_WORKERS = env('SUPERRMT_WORKERS')
SUPERRMT_QUAD_RTOL = env('SUPERRMT_QUAD_RTOL')
SUPERRMT_RESULTS_SCHEMA = 'superrmt.results/1'

LOG_LEVEL = env('SUPERRMT_LOG_LEVEL').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('superalg', 'ensembles', 'spectral', 'berezin', 'verify', 'workbench')
    },
}
