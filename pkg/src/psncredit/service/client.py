"""Client-side link over HTTP: a Participant plugged into this behaves
exactly as over an in-process link, including typed rejections."""

from __future__ import annotations

import httpx

from ..errors import MalformedMessage
from ..messages import (
    CreditDeposit,
    ErrorResponse,
    IdentityRequest,
    Message,
    ReportSubmit,
    TaskRequest,
    TokenSignRequest,
)
from ..server import PublicParams
from . import schemas as s


class HttpServerLink:
    def __init__(self, client: httpx.Client):
        self.client = client

    def send(self, msg: Message) -> Message:
        if isinstance(msg, IdentityRequest):
            path, payload, parse = (
                "/identity",
                s.IdentityIn.from_rid(msg.rid).model_dump(),
                lambda d: s.IdentityOut(**d).to_grant(),
            )
        elif isinstance(msg, TokenSignRequest):
            path, payload, parse = (
                "/token-sign",
                s.TokenSignIn.from_msg(msg).model_dump(),
                lambda d: s.TokenSignOut(**d).to_grant(),
            )
        elif isinstance(msg, TaskRequest):
            path, payload, parse = (
                "/task-request",
                s.TaskRequestIn.from_msg(msg).model_dump(),
                lambda d: s.TaskGrantOut(**d).to_grant(),
            )
        elif isinstance(msg, ReportSubmit):
            path, payload, parse = (
                "/report",
                s.ReportIn.from_msg(msg).model_dump(),
                lambda d: s.ReportOut(**d).to_grant(),
            )
        elif isinstance(msg, CreditDeposit):
            path, payload, parse = (
                "/deposit",
                s.DepositIn.from_msg(msg).model_dump(),
                lambda d: s.DepositOut(**d).to_receipt(),
            )
        else:
            raise MalformedMessage(f"no endpoint for {type(msg).__name__}")
        response = self.client.post(path, json=payload)
        body = response.json()
        if response.status_code != 200:
            if isinstance(body, dict) and "code" in body:
                return ErrorResponse(code=body["code"], detail=body.get("detail", ""))
            raise MalformedMessage(f"{path} failed with {response.status_code}: {body}")
        return parse(body)

    def params(self) -> PublicParams:
        response = self.client.get("/params")
        response.raise_for_status()
        return s.ParamsOut(**response.json()).to_params()

    def now(self) -> int:
        response = self.client.get("/clock")
        response.raise_for_status()
        return int(response.json()["tick"])
