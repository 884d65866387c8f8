# Generated by Django 5.2.5 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('run_id', models.CharField(editable=False, max_length=20, unique=True)),
                ('subcommand', models.CharField(choices=[('sample', 'sample'), ('dos', 'dos'), ('zgen', 'zgen'), ('volumes', 'volumes'), ('verify', 'verify'), ('info', 'info')], max_length=20)),
                ('config', models.JSONField(default=dict)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('status', models.CharField(choices=[('Running', 'Running'), ('Passed', 'Passed'), ('Failed', 'Failed'), ('Error', 'Error')], default='Running', max_length=10)),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('output_path', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['subcommand', '-created_at'], name='workbench_r_subcomm_5c2a1e_idx'), models.Index(fields=['status'], name='workbench_r_status_8d41b7_idx')],
            },
        ),
    ]
