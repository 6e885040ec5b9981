"""Local HTTP service backing the authoring UI.

Sessions hold uploaded (image, depth, mask) triples in memory plus a per
-session scratch directory so the pipeline can hash the original files.
All math is delegated to the library, so a preview response is bitwise
consistent with what the pipeline writes for the same parameters.

API (JSON errors look like {"error": code, "message": text}):
    POST /api/session                     multipart image/depth/mask -> {"session": id}
    POST /api/session/{id}/trajectory     {"points": [[x,y],...], "options": {...}}
    POST /api/session/{id}/preset         {"kind": ..., "magnitude": ..., "options": {...}}
    GET  /api/session/{id}/bundle         zip of the control bundle
    GET  /                                the authoring UI, when built

Sessions expire after an hour; this is a single-user authoring tool, not a
deployment target (no auth, nothing persists across restarts).
"""

from __future__ import annotations

import base64
import io
import secrets
import shutil
import tempfile
import threading
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Form, Request, UploadFile
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, Response

from . import pipeline, tensor_io, trajectory, warp
from .camera import default_intrinsics, trajectory_to_poses
from .errors import FileFormatError, ValidationError
from .presets import PresetSpec, preset_poses
from .tensor_io import OTSR_MAGIC

SESSION_TTL_SECONDS = 3600


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Session:
    id: str
    directory: Path
    image_path: Path
    depth_path: Path
    mask_path: Path
    image: np.ndarray
    depth: np.ndarray
    mask: np.ndarray
    created: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_guidance: dict | None = None
    last_options: dict = field(default_factory=dict)


class SessionStore:
    def __init__(self, ttl: float = SESSION_TTL_SECONDS):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        self.purge_expired()
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        return session

    def purge_expired(self) -> None:
        now = time.time()
        with self._lock:
            expired = [s for s in self._sessions.values() if now - s.created > self.ttl]
            for session in expired:
                del self._sessions[session.id]
        for session in expired:
            shutil.rmtree(session.directory, ignore_errors=True)


def create_app(ui_dir=None) -> FastAPI:
    app = FastAPI(title="objctrl preview service")
    store = SessionStore()
    app.state.sessions = store
    ui_root = Path(ui_dir) if ui_dir else _default_ui_dir()

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "message": exc.message}
        )

    @app.post("/api/session")
    async def create_session(image: UploadFile, depth: UploadFile, mask: UploadFile,
                             depth_min: float | None = Form(None),
                             depth_max: float | None = Form(None)):
        directory = Path(tempfile.mkdtemp(prefix="objctrl_session_"))
        try:
            image_path = directory / "image.png"
            image_path.write_bytes(await image.read())
            depth_bytes = await depth.read()
            if depth_bytes[:4] == OTSR_MAGIC[:4]:
                depth_path = directory / "depth.otsr"
                depth_path.write_bytes(depth_bytes)
            else:
                depth_path = directory / "depth.png"
                depth_path.write_bytes(depth_bytes)
                if depth_min is None or depth_max is None:
                    raise ApiError(422, "missing_depth_range",
                                   "16-bit PNG depth needs depth_min and depth_max form fields")
                tensor_io.write_json(tensor_io.depth_sidecar_path(depth_path),
                                     {"min": depth_min, "max": depth_max})
            mask_path = directory / "mask.png"
            mask_path.write_bytes(await mask.read())

            try:
                image_arr = tensor_io.load_image(image_path)
                depth_arr = tensor_io.load_depth(depth_path)
                mask_arr = tensor_io.load_mask(mask_path)
            except (ValidationError, FileFormatError) as exc:
                raise ApiError(422, "bad_upload", str(exc)) from exc
            h, w = image_arr.shape[:2]
            if depth_arr.shape != (h, w) or mask_arr.shape != (h, w):
                raise ApiError(422, "dimension_mismatch",
                               f"image {(h, w)}, depth {depth_arr.shape}, mask {mask_arr.shape}")
        except ApiError:
            shutil.rmtree(directory, ignore_errors=True)
            raise

        session = Session(
            id=secrets.token_urlsafe(24),  # 192 bits
            directory=directory,
            image_path=image_path, depth_path=depth_path, mask_path=mask_path,
            image=image_arr, depth=depth_arr, mask=mask_arr,
        )
        store.add(session)
        return {"session": session.id}

    @app.post("/api/session/{session_id}/trajectory")
    async def post_trajectory(session_id: str, body: dict):
        session = store.get(session_id)
        with session.lock:
            options = body.get("options") or {}
            preset = body.get("preset") or options.get("preset")
            if preset:
                return _preview_preset(session, preset, options)
            points = body.get("points")
            if not points or len(points) < 2:
                raise ApiError(422, "bad_stroke", "need at least 2 stroke points")
            return _preview_stroke(session, points, options)

    @app.post("/api/session/{session_id}/preset")
    async def post_preset(session_id: str, body: dict):
        session = store.get(session_id)
        with session.lock:
            return _preview_preset(session, body, body.get("options") or {})

    @app.get("/api/session/{session_id}/bundle")
    async def get_bundle(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.last_guidance is None:
                raise ApiError(422, "no_guidance",
                               "submit a trajectory or preset before exporting a bundle")
            payload = _build_bundle_zip(session)
        return Response(
            content=payload,
            media_type="application/zip",
            headers={"Content-Disposition": "attachment; filename=control_bundle.zip"},
        )

    @app.get("/", response_class=HTMLResponse)
    async def index():
        index_file = ui_root / "index.html" if ui_root else None
        if index_file and index_file.exists():
            return HTMLResponse(index_file.read_text(encoding="utf-8"))
        return HTMLResponse(
            "<html><body><h1>objctrl preview service</h1>"
            "<p>UI bundle not built; the JSON API under /api is live.</p></body></html>"
        )

    @app.get("/ui/{asset_path:path}")
    async def ui_asset(asset_path: str):
        if ui_root is None:
            raise ApiError(404, "no_ui", "UI bundle not built")
        target = (ui_root / asset_path).resolve()
        if not str(target).startswith(str(ui_root.resolve())) or not target.is_file():
            raise ApiError(404, "no_asset", f"unknown asset {asset_path}")
        media = "text/javascript" if target.suffix == ".js" else None
        return FileResponse(target, media_type=media)

    return app


def _preview_stroke(session: Session, points, options: dict) -> dict:
    frames = int(options.get("frames", 14))
    theta = float(options.get("theta", 0.2))
    stroke = np.asarray(points, dtype=np.float64)
    h, w = session.depth.shape
    if stroke.ndim != 2 or stroke.shape[1] != 2:
        raise ApiError(422, "bad_stroke", "points must be [[x, y], ...]")
    if np.any((stroke[:, 0] < 0) | (stroke[:, 0] >= w) | (stroke[:, 1] < 0) | (stroke[:, 1] >= h)):
        raise ApiError(422, "stroke_out_of_bounds", f"stroke must stay inside [0,{w})x[0,{h})")
    try:
        cfg = trajectory.SmoothingConfig(theta=theta)
        traj3d = trajectory.lift(stroke, session.depth, frames, cfg)
        poses = trajectory_to_poses(traj3d, default_intrinsics(w, h))
        masks = warp.warp_mask_sequence(session.mask, session.depth, poses)
    except ValidationError as exc:
        raise ApiError(422, "invalid_request", str(exc)) from exc

    stroke_path = session.directory / "stroke.json"
    trajectory.save_trajectory(stroke, stroke_path)
    session.last_guidance = {"traj2d": str(stroke_path)}
    session.last_options = {"frames": frames, "theta": theta}
    return _preview_payload(session, poses, masks, traj3d=traj3d)


def _preview_preset(session: Session, preset: dict, options: dict) -> dict:
    frames = int(options.get("frames", 14))
    h, w = session.depth.shape
    try:
        spec = PresetSpec(
            kind=str(preset.get("kind")),
            magnitude=float(preset.get("magnitude", preset.get("mag", 0.0))),
            frames=frames,
            pivot_depth=float(preset.get("pivot_depth", 1.0)),
        )
        poses = preset_poses(spec, default_intrinsics(w, h))
        masks = warp.warp_mask_sequence(session.mask, session.depth, poses)
    except ValidationError as exc:
        raise ApiError(422, "invalid_request", str(exc)) from exc

    session.last_guidance = {"preset": {"kind": spec.kind, "magnitude": spec.magnitude,
                                        "pivot_depth": spec.pivot_depth}}
    session.last_options = {"frames": frames}
    return _preview_payload(session, poses, masks, traj3d=None)


def _preview_payload(session: Session, poses, masks, traj3d) -> dict:
    overlays = [base64.b64encode(_mask_png_bytes(m)).decode("ascii") for m in masks]
    return {
        "session": session.id,
        "frames": len(masks),
        "traj3d": None if traj3d is None else [[float(v) for v in row] for row in traj3d],
        "depth_profile": None if traj3d is None else [float(v) for v in traj3d[:, 2]],
        "camera_path": [[float(v) for v in pose.t] for pose in poses.frames],
        "masks": overlays,
    }


def _mask_png_bytes(mask: np.ndarray) -> bytes:
    buf = io.BytesIO()
    from PIL import Image as PILImage

    PILImage.fromarray((np.asarray(mask) * 255).astype(np.uint8), mode="L").save(
        buf, format="PNG"
    )
    return buf.getvalue()


def _build_bundle_zip(session: Session) -> bytes:
    options = pipeline.RunOptions(
        frames=int(session.last_options.get("frames", 14)),
        theta=float(session.last_options.get("theta", 0.2)),
    )
    out_dir = Path(tempfile.mkdtemp(prefix="objctrl_bundle_"))
    try:
        bundle = pipeline.run(
            session.image_path, session.depth_path, session.mask_path,
            session.last_guidance, out_dir, options,
        )
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for path in sorted(bundle.directory.iterdir()):
                info = zipfile.ZipInfo(path.name, date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, path.read_bytes())
        return buf.getvalue()
    except ValidationError as exc:
        raise ApiError(422, "invalid_request", str(exc)) from exc
    finally:
        shutil.rmtree(out_dir, ignore_errors=True)


def _default_ui_dir():
    here = Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "frontend" / "dist"
        if candidate.exists():
            return candidate
    return None
