"""Steer a live engine over the wire: inject events, watch frames come back.

Run:  python demos/04_live_steering.py
"""

import asyncio
import dataclasses
import json

from amico import default_profile
from amico.server import EngineServer
from amico.wire import CueMsg, FrameMsg, decode, frame_from_message


async def main() -> None:
    profile = dataclasses.replace(default_profile(), tick_hz=60)
    server = EngineServer(profile)
    tcp = await server.start_tcp("127.0.0.1", 0)
    port = tcp.sockets[0].getsockname()[1]
    engine = asyncio.create_task(server.run())
    print(f"engine up on 127.0.0.1:{port} at {profile.tick_hz} Hz")

    reader, writer = await asyncio.open_connection("127.0.0.1", port)

    async def inject(name: str) -> None:
        line = json.dumps(
            {"v": 1, "type": "control", "op": "inject_event", "body": {"name": name}}
        )
        writer.write((line + "\n").encode())
        await writer.drain()
        print(f"\n>> injected {name}")

    async def watch(seconds: float) -> None:
        loop = asyncio.get_running_loop()
        deadline = loop.time() + seconds
        while loop.time() < deadline:
            timeout = deadline - loop.time()
            try:
                raw = await asyncio.wait_for(reader.readline(), timeout)
            except asyncio.TimeoutError:
                return
            msg = decode(raw.decode())
            if isinstance(msg, CueMsg):
                print(f"   cue: {msg.name}")
            elif isinstance(msg, FrameMsg) and msg.t_ms % 500 < 17:
                lit = len(frame_from_message(msg).lit_set())
                print(f"   t={msg.t_ms:5d} ms  {lit:3d} pixels lit")

    await inject("search_started")
    await watch(1.2)
    await inject("piece_detected")
    await watch(1.0)
    for _ in range(10):
        await inject("assembly_completed")
    await watch(3.5)  # the tenth assembly earns the rainbow

    writer.close()
    server.request_stop()
    await engine
    tcp.close()
    await tcp.wait_closed()
    print("\nengine stopped")


if __name__ == "__main__":
    asyncio.run(main())
