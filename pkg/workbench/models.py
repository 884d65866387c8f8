from django.db import models
import uuid


class RunRecord(models.Model):
    SUBCOMMANDS = [
        ('sample', 'sample'),
        ('dos', 'dos'),
        ('zgen', 'zgen'),
        ('volumes', 'volumes'),
        ('verify', 'verify'),
        ('info', 'info'),
    ]

    STATUS_CHOICES = [
        ('Running', 'Running'),
        ('Passed', 'Passed'),
        ('Failed', 'Failed'),
        ('Error', 'Error'),
    ]

    run_id = models.CharField(max_length=20, unique=True, editable=False)
    subcommand = models.CharField(max_length=20, choices=SUBCOMMANDS)
    config = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='Running')
    exit_code = models.IntegerField(null=True, blank=True)
    output_path = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['subcommand', '-created_at'], name='workbench_r_subcomm_5c2a1e_idx'),
            models.Index(fields=['status'], name='workbench_r_status_8d41b7_idx'),
        ]

    def save(self, *args, **kwargs):
        if not self.run_id:
            self.run_id = f"RUN-{uuid.uuid4().hex[:8].upper()}"
        super().save(*args, **kwargs)

    def __str__(self):
        return f"{self.run_id} - {self.subcommand} ({self.status})"
