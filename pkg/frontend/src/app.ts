// Browser bootstrap: URL params, websocket lifecycle, event wiring.

import { AudioCues } from './audio.js';
import { InteractionController } from './controller.js';
import { rect } from './geometry.js';
import { Renderer } from './render.js';
import { DEFAULT_CONFIG, UiSession } from './session.js';
import { ViewTransform } from './view.js';

const PING_INTERVAL_MS = 5000;
const PRESENCE_INTERVAL_MS = 50; // at most 20 presence updates per second

function start(): void {
    const params = new URLSearchParams(window.location.search);
    const room = params.get('room') ?? 'demo';
    const name = params.get('name') ?? `guest${Math.floor(Math.random() * 1000)}`;

    const canvas = document.getElementById('board') as HTMLCanvasElement;
    const session = new UiSession({ ...DEFAULT_CONFIG });
    const view = new ViewTransform();
    const controller = new InteractionController(session, view);
    const renderer = new Renderer(canvas, session, view, controller);
    const audio = new AudioCues();
    session.onCue = (kind) => audio.play(kind);
    controller.promptText = (initial) => window.prompt('Note text:', initial);

    const resize = () => {
        canvas.width = window.innerWidth;
        canvas.height = window.innerHeight;
    };
    window.addEventListener('resize', resize);
    resize();
    view.pan = { x: -canvas.width / 2, y: -canvas.height / 2 }; // origin centred

    // -- connection -----------------------------------------------------------

    let socket: WebSocket | null = null;
    let pingTimer: number | undefined;

    const connect = () => {
        const proto = window.location.protocol === 'https:' ? 'wss:' : 'ws:';
        socket = new WebSocket(`${proto}//${window.location.host}/ws/${room}`);
        socket.onopen = () => {
            const resume = session.connected ? session.replica.appliedSeq : null;
            socket!.send(JSON.stringify({ type: 'hello', room, name, resume_from_seq: resume }));
            pingTimer = window.setInterval(() => socket?.send(JSON.stringify({ type: 'ping' })), PING_INTERVAL_MS);
        };
        socket.onmessage = (e) => session.handleServer(JSON.parse(e.data));
        socket.onclose = () => {
            window.clearInterval(pingTimer);
            session.notice('connection lost, retrying…');
            window.setTimeout(connect, 1000);
        };
    };
    session.sendMessage = (msg) => {
        if (socket && socket.readyState === WebSocket.OPEN) socket.send(JSON.stringify(msg));
    };
    connect();

    // -- presence -------------------------------------------------------------

    let lastPresence = 0;
    let holding: string | null = null;
    controller.onHoldingChange = (h) => { holding = h; sendPresence(true); };
    const sendPresence = (force = false) => {
        const now = performance.now();
        if (!force && now - lastPresence < PRESENCE_INTERVAL_MS) return;
        lastPresence = now;
        const world = view.visibleWorldRect(canvas.width, canvas.height);
        const cursor = view.unproject(controller.cursorScreen);
        session.sendMessage({
            type: 'presence',
            cursor: { x: cursor.x, y: cursor.y },
            viewport: rect(world.min.x, world.min.y, world.max.x, world.max.y),
            holding,
        });
    };

    // -- input ------------------------------------------------------------------

    const point = (e: MouseEvent) => ({ x: e.offsetX, y: e.offsetY });
    canvas.addEventListener('pointerdown', (e) => {
        if (e.button !== 0) return;
        controller.pointerDown(point(e), { shift: e.shiftKey });
        canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener('pointermove', (e) => {
        controller.pointerMove(point(e));
        sendPresence();
    });
    canvas.addEventListener('pointerup', (e) => {
        if (e.button !== 0) return;
        controller.pointerUp(point(e), { shift: e.shiftKey });
        sendPresence(true);
    });
    canvas.addEventListener('dblclick', (e) => controller.doubleClick(point(e)));
    canvas.addEventListener('wheel', (e) => {
        e.preventDefault();
        controller.wheel(point(e), e.deltaY);
        sendPresence();
    }, { passive: false });

    let pushToTalk = false;
    window.addEventListener('keydown', (e) => {
        if (e.repeat) return;
        if (e.key === 'v' || e.key === 'V') {
            pushToTalk = true;
            session.setSpeaking(true);
        } else if (e.key === 'm' || e.key === 'M') {
            session.notice(audio.toggleMute() ? 'sound off' : 'sound on');
        } else if (e.key === 'Delete' || e.key === 'Backspace') {
            controller.deleteSelection();
        } else if (e.key === 'Escape') {
            controller.selection = null;
        }
    });
    window.addEventListener('keyup', (e) => {
        if ((e.key === 'v' || e.key === 'V') && pushToTalk) {
            pushToTalk = false;
            session.setSpeaking(false);
        }
    });

    // -- render loop ---------------------------------------------------------------

    const frame = (t: number) => {
        renderer.draw(t);
        requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
}

start();
