"""Infrastructure services: matrix persistence and observability."""
