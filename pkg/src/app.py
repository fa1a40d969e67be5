"""
Flask application - the toolchain as a small compile service.

POST bodies carry the three specification texts:
    {"vocabulary": "...", "architecture": "...", "deployment": "...", "seed": 42}
"""

import logging
from flask import Flask, request, make_response, jsonify
from src.auth import validate_api_key
from src.bundles import bundle_names, get_bundle
from src.config import Config
from src.errors import ParseError, ToolchainError
from src.mapper import explain_mapping, map_services, mapping_to_json
from src.pipeline import bundle_metrics, check, parse_system
from src.validator import has_errors

logging.basicConfig(level=Config.LOG_LEVEL)
logger = logging.getLogger(__name__)

app = Flask(__name__)


def _build_cors_response(data, status_code=200):
    response = make_response(jsonify(data), status_code)
    response.headers['Access-Control-Allow-Origin'] = '*'
    response.headers['Access-Control-Allow-Headers'] = 'Content-Type, x-api-key'
    response.headers['Access-Control-Allow-Methods'] = 'POST, GET, OPTIONS'
    return response


def _unauthorized():
    return _build_cors_response({"status": "error", "message": "Unauthorized"}, 401)


def _system_from_request():
    data = request.get_json(force=True, silent=True) or {}
    missing = [k for k in ("vocabulary", "architecture", "deployment") if not isinstance(data.get(k), str)]
    if missing:
        raise ToolchainError("E-MISSING-FILE", f"request body lacks {', '.join(missing)}")
    return data, parse_system(data["vocabulary"], data["architecture"], data["deployment"])


def _diagnostics_json(diagnostics):
    return [
        {"severity": d.severity, "code": d.code, "location": str(d.span) if d.span else None,
         "message": d.message}
        for d in diagnostics
    ]


def _error_response(e: ToolchainError):
    status = 400 if isinstance(e, ParseError) or e.code == "E-MISSING-FILE" else 422
    return _build_cors_response({"status": "error", "code": e.code, "message": str(e)}, status)


@app.route('/health', methods=['GET'])
def health_check():
    return _build_cors_response({"status": "healthy"}, 200)


@app.route('/bundles', methods=['GET'])
def list_bundles():
    return _build_cors_response({"status": "success", "bundles": bundle_names()})


@app.route('/check', methods=['POST', 'OPTIONS'])
def check_endpoint():
    if request.method == 'OPTIONS': return _build_cors_response({})
    if not validate_api_key(request): return _unauthorized()
    try:
        _, system = _system_from_request()
        diagnostics = check(system)
    except ToolchainError as e:
        return _error_response(e)
    return _build_cors_response({
        "status": "error" if has_errors(diagnostics) else "success",
        "diagnostics": _diagnostics_json(diagnostics),
    })


@app.route('/map', methods=['POST', 'OPTIONS'])
def map_endpoint():
    if request.method == 'OPTIONS': return _build_cors_response({})
    if not validate_api_key(request): return _unauthorized()
    try:
        data, system = _system_from_request()
        diagnostics = check(system)
        if has_errors(diagnostics):
            return _build_cors_response({"status": "error", "diagnostics": _diagnostics_json(diagnostics)}, 422)
        seed = int(data.get("seed", Config.DEFAULT_SEED))
        mapping = map_services(system.architecture, system.deployment, seed)
    except (ValueError, TypeError) as e:
        return _build_cors_response({"status": "error", "message": f"bad seed: {e}"}, 400)
    except ToolchainError as e:
        return _error_response(e)
    logger.info(f"[MAP] {len(mapping.assignments)} instances, seed={seed}")
    return _build_cors_response({
        "status": "success",
        "mapping": mapping_to_json(mapping),
        "explain": explain_mapping(mapping),
    })


@app.route('/metrics', methods=['POST', 'OPTIONS'])
def metrics_endpoint():
    if request.method == 'OPTIONS': return _build_cors_response({})
    if not validate_api_key(request): return _unauthorized()
    data = request.get_json(force=True, silent=True) or {}
    try:
        bundle = get_bundle(str(data.get("bundle", "")))
        devices = data.get("devices")
        row = bundle_metrics(bundle, int(devices) if devices is not None else None,
                             int(data.get("seed", Config.DEFAULT_SEED)))
    except ToolchainError as e:
        status = 404 if e.code == "E-UNKNOWN-BUNDLE" else 422
        return _build_cors_response({"status": "error", "code": e.code, "message": str(e)}, status)
    except (ValueError, TypeError) as e:
        return _build_cors_response({"status": "error", "message": str(e)}, 400)
    return _build_cors_response({
        "status": "success",
        "handwritten": row.handwritten,
        "generated": row.generated,
        "ratio": round(row.ratio, 4),
    })


@app.errorhandler(500)
def internal_error(error): return _build_cors_response({"status": "error", "message": "Internal Server Error"}, 500)

@app.errorhandler(404)
def not_found(error): return _build_cors_response({"status": "error", "message": "Endpoint not found"}, 404)

if __name__ == '__main__':
    app.run(debug=Config.DEBUG_MODE, host='0.0.0.0', port=5000)
