"""
URL configuration for scale_inference project.

Only the admin is exposed; stored Monte Carlo studies are browsed there.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
