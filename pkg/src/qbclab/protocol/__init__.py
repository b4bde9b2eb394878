from .codec import decode, encode
from .messages import (
    CommitRegister,
    ProtocolParams,
    QuantumPayload,
    Transcript,
    UnveilOpen,
    Verdict,
)
from .session import (
    HonestAlice,
    HonestBob,
    alice_commit,
    alice_unveil,
    bob_store,
    bob_verify,
    run_session,
    run_sessions,
)
from .transport import queue_transport, socket_transport

__all__ = [
    "CommitRegister", "HonestAlice", "HonestBob", "ProtocolParams", "QuantumPayload",
    "Transcript", "UnveilOpen", "Verdict", "alice_commit", "alice_unveil", "bob_store",
    "bob_verify", "decode", "encode", "queue_transport", "run_session", "run_sessions",
    "socket_transport",
]
