"""
Canonical pretty-printers for SVL, SAL and SDL.

Output uses 2-space indentation and one declaration per line, and parses back
to a structurally equal model. The SDL form spends exactly 8 lines per device
plus one header line.
"""

from typing import List

from src.model import Architecture, Deployment, Retrieval, Signature, Vocabulary


def _signature(keyword: str, sig: Signature) -> str:
    params = ", ".join(f"{p.name}: {p.type}" for p in sig.params)
    return f"{keyword} {sig.name}({params});"


def _retrieval(keyword: str, r: Retrieval) -> str:
    return f"{keyword} {r.name}: {r.struct} accessed-by {r.access_key.name}: {r.access_key.type};"


def print_vocabulary(v: Vocabulary) -> str:
    lines: List[str] = [f"vocabulary {v.name};", "regions {"]
    lines += [f"  {r.name}: integer;" for r in v.regions]
    lines += ["}", "structs {"]
    for struct in v.structs:
        lines.append(f"  {struct.name} {{")
        lines += [f"    {f.name}: {f.type};" for f in struct.fields]
        lines.append("  }")
    lines += ["}", "resources {"]

    def block(keyword: str, decls, body) -> None:
        if not decls:
            return
        lines.append(f"  {keyword} {{")
        for decl in decls:
            lines.append(f"    {decl.name} {{")
            lines.extend(f"      {entry}" for entry in body(decl))
            lines.append("    }")
        lines.append("  }")

    block("sensors", v.sensors,
          lambda s: [f"generate {e.name}: {e.struct};" for e in s.generates])
    block("actuators", v.actuators,
          lambda a: [_signature("action", sig) for sig in a.actions])
    block("storages", v.storages,
          lambda s: [_retrieval("generate", r) for r in s.retrievals])
    block("userinterfaces", v.userinterfaces,
          lambda u: [_signature("command", c) for c in u.commands]
          + [_signature("action", a) for a in u.actions]
          + [_retrieval("request", r) for r in u.requests])
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_architecture(a: Architecture) -> str:
    lines: List[str] = [f"architecture {a.name} uses {a.vocabulary_name};"]
    for service in a.services:
        lines += ["", f"computationalService {service.name} {{"]
        lines += [f"  consume {c.event} from {c.scope};" for c in service.consumes]
        lines += [f"  request {r.retrieval};" for r in service.requests]
        lines += [f"  generate {g.event}: {g.struct};" for g in service.generates]
        lines += [
            f"  command {c.action}({', '.join(c.arg_names)}) to {c.scope};"
            for c in service.commands
        ]
        lines += [f"  in-region: {service.in_region};", "}"]
    return "\n".join(lines) + "\n"


def print_deployment(d: Deployment) -> str:
    lines: List[str] = [f"deployment {d.name} uses {d.vocabulary_name};"]
    for device in d.devices:
        entries = " ".join(f"{label}:{value};" for label, value in device.region_path.entries)
        resources = ", ".join(device.resources)
        lines += [
            f"device {device.name} {{",
            "  region {",
            f"    {entries}",
            "  }",
            f"  resources {{ {resources} }}" if resources else "  resources { }",
            f"  type: {device.platform_type};",
            f"  mobile: {'true' if device.mobile else 'false'};",
            "}",
        ]
    return "\n".join(lines) + "\n"
