"""FastAPI application wrapping one sensing server instance.

Protocol endpoints mirror the message exchanges one to one; typed
rejections come back as HTTP 400 with their wire code, so a client can
re-raise the exact exception.  Harness endpoints run simulations,
the adversarial suite, benchmarks, and storage accounting server-side.
"""

from __future__ import annotations

import random

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..clock import SimClock
from ..errors import KeyGenError, Rejection, ScenarioError
from ..harness import attack_suite, bench, storage_record
from ..server import SensingServer, ServerConfig
from ..sim.run import exponent_bits_for, run
from ..sim.scenario import scenario_from_mapping
from . import schemas as s

NO_SERVER = JSONResponse(
    status_code=409,
    content={"code": "no_server", "detail": "create one with POST /server first"},
)


def create_app() -> FastAPI:
    app = FastAPI(title="participatory sensing credit service")
    app.state.server = None

    @app.exception_handler(Rejection)
    async def _rejection(request: Request, exc: Rejection) -> JSONResponse:
        return JSONResponse(status_code=400, content={"code": exc.code, "detail": str(exc)})

    @app.exception_handler(ScenarioError)
    async def _scenario(request: Request, exc: ScenarioError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"code": "scenario", "detail": str(exc)})

    @app.exception_handler(KeyGenError)
    async def _keygen(request: Request, exc: KeyGenError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"code": "keygen", "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"code": "invalid", "detail": str(exc)})

    # ---- lifecycle ----------------------------------------------------------

    @app.post("/server")
    def create_server(body: s.ServerInit) -> s.ParamsOut:
        config = ServerConfig(
            tasks_per_window=body.tasks_per_window,
            c_min=body.c_min,
            c_max=body.c_max,
            policy_c=body.policy_c,
            horizon=body.horizon,
            report_slack=body.report_slack,
        )
        bits = (
            body.exponent_bits
            if body.exponent_bits is not None
            else exponent_bits_for(body.key_bits)
        )
        app.state.server = SensingServer.generate(
            config,
            body.key_bits,
            random.Random(body.seed),
            exponent_bits=bits,
            clock=SimClock(),
        )
        return s.ParamsOut.from_params(app.state.server.public_params())

    def _server() -> SensingServer | None:
        return app.state.server

    @app.get("/params")
    def get_params():
        server = _server()
        if server is None:
            return NO_SERVER
        return s.ParamsOut.from_params(server.public_params())

    @app.get("/clock")
    def get_clock():
        server = _server()
        if server is None:
            return NO_SERVER
        return s.ClockOut(tick=server.clock.now)

    @app.post("/clock/advance")
    def advance_clock(body: s.AdvanceIn):
        server = _server()
        if server is None:
            return NO_SERVER
        return s.ClockOut(tick=server.clock.advance(body.ticks))

    # ---- protocol -----------------------------------------------------------

    @app.post("/identity")
    def identity(body: s.IdentityIn):
        server = _server()
        if server is None:
            return NO_SERVER
        return s.IdentityOut.from_grant(server.handle_identity(bytes.fromhex(body.rid)))

    @app.post("/token-sign")
    def token_sign(body: s.TokenSignIn):
        server = _server()
        if server is None:
            return NO_SERVER
        m = body.to_msg()
        return s.TokenSignOut.from_grant(
            server.handle_token_sign(m.pseudonym, m.task_index, m.blinded, m.kind)
        )

    @app.post("/task-request")
    def task_request(body: s.TaskRequestIn):
        server = _server()
        if server is None:
            return NO_SERVER
        m = body.to_msg()
        return s.TaskGrantOut.from_grant(server.handle_task_request(m.pseudonym, m.token))

    @app.post("/report")
    def report(body: s.ReportIn):
        server = _server()
        if server is None:
            return NO_SERVER
        m = body.to_msg()
        return s.ReportOut.from_grant(
            server.handle_report(m.pseudonym, m.token, list(m.blinded), m.ticks, m.ciphertext)
        )

    @app.post("/deposit")
    def deposit(body: s.DepositIn):
        server = _server()
        if server is None:
            return NO_SERVER
        m = body.to_msg()
        return s.DepositOut.from_receipt(server.handle_deposit(m.rid, m.token))

    @app.post("/complete-task")
    def complete_task(body: s.TaskIndexIn):
        server = _server()
        if server is None:
            return NO_SERVER
        server.complete_task(body.task_index)
        return {"ok": True}

    @app.post("/expire-window")
    def expire_window(body: s.WindowIn):
        server = _server()
        if server is None:
            return NO_SERVER
        server.expire_window(body.window)
        return {"ok": True}

    @app.get("/balance/{rid}")
    def balance(rid: str):
        server = _server()
        if server is None:
            return NO_SERVER
        return {"balance": server.balance(bytes.fromhex(rid))}

    @app.get("/storage")
    def storage():
        server = _server()
        if server is None:
            return NO_SERVER
        return server.storage_metrics().__dict__

    # ---- harness ------------------------------------------------------------

    @app.post("/run")
    def run_scenario(body: s.RunIn):
        scenario = scenario_from_mapping(body.scenario)
        bundle = run(scenario, seed=body.seed)
        return {"summary": bundle.summary(), "lines": bundle.lines}

    @app.post("/attack-suite")
    def run_suite(body: s.SuiteIn):
        return attack_suite(body.seed, key_bits=body.key_bits).to_dict()

    @app.post("/bench")
    def run_bench(body: s.BenchIn):
        return bench(body.tasks, body.c, body.key_bits, body.repeat).to_dict()

    @app.post("/storage-grid")
    def run_storage(body: s.StorageIn):
        return storage_record(body.M, body.cmax, key_bits=body.key_bits, seed=body.seed)

    return app


app = create_app()
