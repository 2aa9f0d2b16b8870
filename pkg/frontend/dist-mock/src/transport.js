/** HTTP transport behind an interface so tests can observe or fake the wire.
 *
 * The browser implementation uses XMLHttpRequest rather than fetch because
 * only XHR exposes upload progress events, and the UI reports progress while
 * a recording uploads.
 */
/** The request never completed: DNS, refused connection, abort, timeout. */
export class TransportError extends Error {
    constructor(message) {
        super(message);
        this.name = "TransportError";
    }
}
export class XhrUploadTransport {
    postFile(url, file, onProgress) {
        return new Promise((resolve, reject) => {
            const xhr = new XMLHttpRequest();
            xhr.open("POST", url);
            xhr.responseType = "text";
            xhr.upload.onprogress = (event) => {
                if (event.lengthComputable && event.total > 0) {
                    onProgress(Math.min(1, event.loaded / event.total));
                }
            };
            xhr.onload = () => resolve({ status: xhr.status, body: xhr.responseText });
            xhr.onerror = () => reject(new TransportError(`network request to ${url} failed`));
            xhr.onabort = () => reject(new TransportError(`request to ${url} was aborted`));
            xhr.ontimeout = () => reject(new TransportError(`request to ${url} timed out`));
            const form = new FormData();
            form.append("audio", file, file.name);
            xhr.send(form);
        });
    }
    getJson(url) {
        return new Promise((resolve, reject) => {
            const xhr = new XMLHttpRequest();
            xhr.open("GET", url);
            xhr.responseType = "text";
            xhr.onload = () => resolve({ status: xhr.status, body: xhr.responseText });
            xhr.onerror = () => reject(new TransportError(`network request to ${url} failed`));
            xhr.onabort = () => reject(new TransportError(`request to ${url} was aborted`));
            xhr.ontimeout = () => reject(new TransportError(`request to ${url} timed out`));
            xhr.send();
        });
    }
}
