"""Logging and OpenTelemetry helpers shared by the command-line driver and library code."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from typing import Iterator, Optional

from opentelemetry import trace

logger = logging.getLogger(__name__)

TRACER_NAME = "hecke_pm"


def configure_logging(verbosity: int = 0) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv; messages go to stderr."""

    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=[logging.StreamHandler()],
        force=True,
    )


def enable_tracing(exporter: Optional[str]) -> bool:
    """Install a tracer provider exporting to ``console`` or ``otlp``; ``none`` leaves the no-op API."""

    if not exporter or exporter == "none":
        return False

    try:
        import opentelemetry.sdk.trace as otel_sdk_trace
        import opentelemetry.sdk.trace.export as otel_trace_export
    except ImportError:
        logger.warning("OpenTelemetry SDK not available; tracing stays disabled")
        return False

    provider = otel_sdk_trace.TracerProvider()
    if exporter == "console":
        processor = otel_trace_export.SimpleSpanProcessor(otel_trace_export.ConsoleSpanExporter())
    elif exporter == "otlp":
        try:
            import opentelemetry.exporter.otlp.proto.grpc.trace_exporter as trace_exporter
        except ImportError:
            logger.warning("OTLP exporter not available; tracing stays disabled")
            return False
        processor = otel_trace_export.BatchSpanProcessor(trace_exporter.OTLPSpanExporter())
    else:
        raise ValueError(f"unknown trace exporter {exporter!r}")

    provider.add_span_processor(processor)
    trace.set_tracer_provider(provider)
    logger.info("tracing enabled (%s exporter)", exporter)
    return True


def get_tracer() -> trace.Tracer:
    return trace.get_tracer(TRACER_NAME)


@contextmanager
def span(name: str, **attributes) -> Iterator[trace.Span]:
    """Start a span carrying scalar attributes (None values are dropped)."""

    with get_tracer().start_as_current_span(name) as current:
        for key, value in attributes.items():
            if value is not None:
                current.set_attribute(key, value if isinstance(value, (int, float, str, bool)) else str(value))
        yield current


def shutdown_tracing() -> None:
    provider = trace.get_tracer_provider()
    if hasattr(provider, "shutdown"):
        provider.shutdown()
