// TCP LineTransport for node-hosted tools and tests. Browser builds use a
// WebSocket adapter with the same interface instead of importing this.

import * as net from 'node:net';

import { LineTransport } from './collab';

export function connectTcp(host: string, port: number): Promise<LineTransport> {
  return new Promise((resolve, reject) => {
    const socket = net.connect({ host, port }, () => {
      socket.setNoDelay(true);
      resolve(transport);
    });
    socket.on('error', (err) => reject(err));

    let lineCb: (line: string) => void = () => {};
    let closeCb: () => void = () => {};
    let buffer = '';
    socket.on('data', (chunk) => {
      buffer += chunk.toString('utf8');
      for (;;) {
        const nl = buffer.indexOf('\n');
        if (nl < 0) break;
        const line = buffer.slice(0, nl);
        buffer = buffer.slice(nl + 1);
        if (line.length > 0) lineCb(line);
      }
    });
    socket.on('close', () => closeCb());

    const transport: LineTransport = {
      send: (line) => {
        socket.write(line + '\n');
      },
      onLine: (cb) => {
        lineCb = cb;
      },
      onClose: (cb) => {
        closeCb = cb;
      },
      close: () => {
        socket.end();
        socket.destroy();
      },
    };
  });
}
