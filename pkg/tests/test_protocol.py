"""Frame codec, CRC integrity, stop-and-wait ARQ and receiver dedup."""

import random

import pytest

from support import LossyCommandLeg, crc16_oracle
from wiacomm.gateway import LoraExchange
from wiacomm.link import LinkConfig, Medium
from wiacomm.model import Action, Command, DeviceId, decode_command
from wiacomm.node import AppNode
from wiacomm.protocol import (
    KIND_ACK,
    KIND_CMD,
    Acked,
    ArqPolicy,
    BadCrc,
    BadKind,
    BadVersion,
    Failed,
    Frame,
    FrameError,
    PayloadTooLong,
    ReceiveAction,
    Truncated,
    arq_send,
    crc16,
    decode_frame,
    dedup_receive,
    encode_frame,
)

LED1_ON = Command(DeviceId.LED1, Action.ON)


def _random_frame(rng: random.Random) -> Frame:
    return Frame(
        kind=rng.choice((KIND_CMD, KIND_ACK)),
        seq=rng.randrange(256),
        payload=bytes(rng.randrange(256) for _ in range(rng.randrange(0, 49))),
    )


def test_crc_check_value_against_independent_oracle():
    assert crc16_oracle(b"123456789") == 0x29B1
    assert crc16(b"123456789") == 0x29B1


def test_crc_matches_oracle_on_random_data():
    rng = random.Random(8)
    for _ in range(200):
        data = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 64)))
        assert crc16(data) == crc16_oracle(data)


def test_cmd_frame_layout():
    wire = encode_frame(Frame(kind=KIND_CMD, seq=0, payload=b"led1_on"))
    assert len(wire) == 13
    assert wire[:4] == bytes([0x01, 0x01, 0x00, 0x07])
    assert wire[4:11] == b"led1_on"


def test_empty_payload_frame():
    wire = encode_frame(Frame(kind=KIND_ACK, seq=9, payload=b""))
    assert len(wire) == 6
    frame = decode_frame(wire)
    assert frame == Frame(kind=KIND_ACK, seq=9, payload=b"")


def test_round_trip_random_frames():
    rng = random.Random(77)
    for _ in range(1000):
        frame = _random_frame(rng)
        assert decode_frame(encode_frame(frame)) == frame


def test_single_bit_flips_never_decode_silently():
    wire = encode_frame(Frame(kind=KIND_CMD, seq=0, payload=b"led1_on"))
    assert len(wire) == 13
    for byte_index in range(13):
        for bit in range(8):
            corrupted = bytearray(wire)
            corrupted[byte_index] ^= 1 << bit
            with pytest.raises((BadCrc, Truncated)):
                decode_frame(bytes(corrupted))


def test_truncated_below_minimum():
    with pytest.raises(Truncated):
        decode_frame(b"\x01\x01\x00\x00\x29")


def test_truncated_on_length_mismatch():
    wire = encode_frame(Frame(kind=KIND_CMD, seq=1, payload=b"led1_on"))
    with pytest.raises(Truncated):
        decode_frame(wire[:-1])


def test_bad_version_only_with_valid_crc():
    body = bytes([0x02, KIND_CMD, 0x00, 0x02]) + b"hi"
    crc = crc16(body)
    with pytest.raises(BadVersion):
        decode_frame(body + bytes([crc >> 8, crc & 0xFF]))


def test_bad_kind_only_with_valid_crc():
    body = bytes([0x01, 0x07, 0x00, 0x02]) + b"hi"
    crc = crc16(body)
    with pytest.raises(BadKind):
        decode_frame(body + bytes([crc >> 8, crc & 0xFF]))


def test_encode_rejects_oversized_payload():
    with pytest.raises(PayloadTooLong):
        encode_frame(Frame(kind=KIND_CMD, seq=0, payload=b"x" * 49))


def test_encode_validates_seq_and_kind():
    with pytest.raises(ValueError):
        encode_frame(Frame(kind=KIND_CMD, seq=256, payload=b""))
    with pytest.raises(ValueError):
        encode_frame(Frame(kind=0x09, seq=0, payload=b""))


class _RespondingLink:
    """Transport double answering every exchange via a scripted function."""

    def __init__(self, reply_fn):
        self.reply_fn = reply_fn
        self.sent = []

    def exchange(self, wire, timeout_ms):
        self.sent.append(wire)
        return self.reply_fn(wire, len(self.sent))


def _matching_ack(wire, _n):
    frame = decode_frame(wire)
    return encode_frame(Frame(kind=KIND_ACK, seq=frame.seq, payload=b"11"))


def test_arq_lossless_acks_on_first_attempt():
    link = _RespondingLink(_matching_ack)
    result = arq_send(LED1_ON, seq=5, link=link, policy=ArqPolicy(ack_timeout_ms=100.0))
    assert result == Acked(code=11, attempts=1)
    assert len(link.sent) == 1


def test_arq_total_loss_exhausts_retries():
    link = _RespondingLink(lambda wire, n: None)
    result = arq_send(LED1_ON, seq=5, link=link,
                      policy=ArqPolicy(ack_timeout_ms=100.0, max_retries=3))
    assert result == Failed(attempts=4)
    assert link.sent == [link.sent[0]] * 4  # same seq retransmitted verbatim


def test_arq_zero_retries():
    link = _RespondingLink(lambda wire, n: None)
    result = arq_send(LED1_ON, seq=1, link=link,
                      policy=ArqPolicy(ack_timeout_ms=100.0, max_retries=0))
    assert result == Failed(attempts=1)


def test_arq_ignores_mismatched_seq_ack():
    link = _RespondingLink(
        lambda wire, n: encode_frame(Frame(kind=KIND_ACK, seq=200, payload=b"11")))
    result = arq_send(LED1_ON, seq=5, link=link,
                      policy=ArqPolicy(ack_timeout_ms=100.0, max_retries=2))
    assert result == Failed(attempts=3)


def test_arq_treats_corrupt_ack_as_timeout():
    def corrupt_then_good(wire, n):
        if n == 1:
            good = bytearray(_matching_ack(wire, n))
            good[-1] ^= 0xFF
            return bytes(good)
        return _matching_ack(wire, n)

    link = _RespondingLink(corrupt_then_good)
    result = arq_send(LED1_ON, seq=5, link=link, policy=ArqPolicy(ack_timeout_ms=100.0))
    assert result == Acked(code=11, attempts=2)


def test_arq_pinned_seed_over_real_medium():
    # Both legs share the medium's seeded stream: cmd delivered, ack lost,
    # two cmds lost, then cmd+ack both delivered on the fourth attempt.
    medium = Medium(LinkConfig(loss_probability=0.5, rng_seed=42))
    node = AppNode()
    link = LoraExchange(medium, node.on_frame)
    result = arq_send(LED1_ON, seq=0, link=link, policy=ArqPolicy.for_link(medium.cfg))
    assert result == Acked(code=11, attempts=4)
    assert node.executions == 1


def test_dedup_receive_rules():
    frame = Frame(kind=KIND_CMD, seq=4, payload=b"led1_on")
    assert dedup_receive(frame, None) is ReceiveAction.EXECUTE
    assert dedup_receive(frame, 4) is ReceiveAction.DUPLICATE_REACK
    assert dedup_receive(frame, 3) is ReceiveAction.EXECUTE


def test_stop_and_wait_with_lost_ack_executes_once():
    node = AppNode()
    wire = encode_frame(Frame(kind=KIND_CMD, seq=7, payload=b"motor_on"))
    first_ack = node.on_frame(wire)
    second_ack = node.on_frame(wire)  # retransmission after a lost ack
    assert first_ack == second_ack
    assert node.executions == 1
    assert int(node.bank.motor) == 1


def test_at_most_once_with_both_legs_lossy():
    medium = Medium(LinkConfig(loss_probability=0.4, rng_seed=11))
    node = AppNode()
    link = LoraExchange(medium, node.on_frame)
    policy = ArqPolicy.for_link(medium.cfg)
    commands = [decode_command(t) for t in
                ("led1_on", "led2_on", "motor_on", "led1_off", "led2_off", "motor_off")]
    acked = 0
    for i in range(500):
        before = node.executions
        result = arq_send(commands[i % 6], seq=i % 256, link=link, policy=policy)
        delta = node.executions - before
        assert delta in (0, 1)
        if isinstance(result, Acked):
            acked += 1
            assert delta == 1
    assert acked > 0


def test_empirical_failure_rate_with_lossless_ack_leg():
    # Command-leg failure probability is p^(r+1) when acks never drop.
    medium = Medium(LinkConfig(loss_probability=0.5, rng_seed=7))
    node = AppNode()
    link = LossyCommandLeg(medium, node.on_frame)
    policy = ArqPolicy.for_link(medium.cfg)
    failures = 0
    for i in range(10_000):
        result = arq_send(LED1_ON, seq=i % 256, link=link, policy=policy)
        if isinstance(result, Failed):
            assert result.attempts == 4
            failures += 1
    assert abs(failures / 10_000 - 0.0625) <= 0.01
