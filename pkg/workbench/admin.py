from django.contrib import admin

from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    list_display = ('run_id', 'subcommand', 'status', 'exit_code', 'seed', 'created_at')
    list_filter = ('subcommand', 'status')
    search_fields = ('run_id', 'output_path')
    readonly_fields = ('run_id', 'config', 'created_at')
