"""
Scaffold rendering.

Scaffolds are Jinja2 templates (docs/templates.md) rendered with strict
undefined lookups, so a misspelled placeholder fails instead of printing
nothing. A block tag standing alone on its line removes that whole line, and
booleans render as `true`/`false`.
"""

from typing import Dict, List, Optional, Tuple
import logging
import os

import jinja2

from src.codegen import DriverManifest, FrameworkManifest
from src.config import Config
from src.errors import ToolchainError

logger = logging.getLogger(__name__)

SERVICE_TEMPLATE = "service.tmpl"
RESOURCE_TEMPLATE = "resource.tmpl"


class TemplateError(ToolchainError):
    def __init__(self, message: str):
        super().__init__("E-TEMPLATE", message)


# ─── engine ───────────────────────────────────────────────────────────

def _finalize(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def make_environment(loader: Optional[jinja2.BaseLoader] = None) -> jinja2.Environment:
    return jinja2.Environment(
        loader=loader,
        undefined=jinja2.StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        autoescape=False,
        finalize=_finalize,
    )


_STRING_ENV = make_environment()


def _syntax_error(exc: jinja2.TemplateSyntaxError) -> TemplateError:
    return TemplateError(f"{exc.name or '<string>'}:{exc.lineno}: {exc.message}")


def _render(template: jinja2.Template, context: Dict) -> str:
    try:
        return template.render(context)
    except jinja2.UndefinedError as exc:
        raise TemplateError(f"unknown placeholder: {exc.message}") from exc


def render_template(text: str, context: Dict) -> str:
    try:
        template = _STRING_ENV.from_string(text)
    except jinja2.TemplateSyntaxError as exc:
        raise _syntax_error(exc) from exc
    return _render(template, context)


# ─── scaffolds ────────────────────────────────────────────────────────

def _param_list(params: List[Dict]) -> str:
    return ", ".join(f"{p['name']}: {p['type']}" for p in params)


def service_context(service) -> Dict:
    ops = list(service.concrete_ops)
    return {
        "service": service.service,
        "partitionAttribute": service.partition_attribute,
        "hooks": list(service.abstract_hooks),
        "subscribes": [op for op in ops if op["kind"] == "subscribe"],
        "publishes": [op for op in ops if op["kind"] == "publish"],
        "commands": [dict(op, argList=", ".join(op["args"]), targetList=", ".join(op["targets"]))
                     for op in ops if op["kind"] == "command"],
        "requests": [op for op in ops if op["kind"] == "request"],
    }


def resource_context(entry) -> Dict:
    methods = []
    for method in entry.methods:
        methods.append(dict(
            method,
            paramList=_param_list(method["params"]),
            returnType=method.get("returns", "void"),
        ))
    return {
        "resource": entry.resource,
        "kind": entry.kind,
        "interface": entry.interface,
        "methods": methods,
        "factoryKeys": [{"resource": r, "platform": p} for r, p in entry.factory_keys],
    }


def template_set_dir(template_set: str) -> str:
    return os.path.join(Config.TEMPLATE_DIR, template_set)


def _load_template(env: jinja2.Environment, template_set: str, name: str) -> jinja2.Template:
    try:
        return env.get_template(name)
    except jinja2.TemplateNotFound as exc:
        raise ToolchainError("E-TEMPLATE-MISSING",
                             f"template set '{template_set}' has no {name} ({template_set_dir(template_set)})") from exc
    except jinja2.TemplateSyntaxError as exc:
        raise _syntax_error(exc) from exc


def render_scaffolds(framework: FrameworkManifest, drivers: DriverManifest,
                     template_set: str = "neutral") -> List[Tuple[str, str]]:
    """Renders one scaffold per service and per resource, as (relative path, text) pairs."""
    if not os.path.isdir(template_set_dir(template_set)):
        raise ToolchainError("E-TEMPLATE-MISSING", f"unknown template set '{template_set}'")
    env = make_environment(jinja2.FileSystemLoader(template_set_dir(template_set)))
    service_tmpl = _load_template(env, template_set, SERVICE_TEMPLATE)
    resource_tmpl = _load_template(env, template_set, RESOURCE_TEMPLATE)

    files: List[Tuple[str, str]] = []
    for service in framework.per_service:
        files.append((f"services/{service.service}.scaffold", _render(service_tmpl, service_context(service))))
    for entry in drivers.per_resource:
        files.append((f"resources/{entry.resource}.scaffold", _render(resource_tmpl, resource_context(entry))))
    logger.info(f"Rendered {len(files)} scaffolds with template set '{template_set}'")
    return files
