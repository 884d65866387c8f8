from django.contrib import admin
from django.urls import path

admin.site.site_header = "superrmt Admin"
admin.site.site_title = "superrmt Run Ledger"
admin.site.index_title = "Workbench runs and verification records"

urlpatterns = [
    path('admin/', admin.site.urls),
]
