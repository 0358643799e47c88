#!/usr/bin/env python3
"""
Celery worker for Monte Carlo replica blocks.

Only needed when CELERY_TASK_ALWAYS_EAGER is false and CELERY_BROKER_URL
points at a real broker; otherwise studies run in-process.
"""
import os
import sys
from pathlib import Path

import django

# Add the project directory to Python path
project_dir = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_dir))

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'scale_inference.settings')

django.setup()

if __name__ == '__main__':
    from scale_inference.celery import app

    print("Starting Celery worker for replica blocks")
    print("=" * 60)
    print("Configuration:")
    print(f"  - Broker: {app.conf.broker_url}")
    print(f"  - Result Backend: {app.conf.result_backend}")
    print(f"  - Task Always Eager: {app.conf.task_always_eager}")
    print(f"  - Concurrency: {app.conf.worker_concurrency}")
    print("=" * 60)

    argv = [
        'worker',
        '--loglevel=info',
        f'--concurrency={app.conf.worker_concurrency or 1}',
        '--queues=celery',
    ]

    app.worker_main(argv)
