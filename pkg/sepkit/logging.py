import logging
import logging.handlers
from queue import Queue

from rich.console import Console
from rich.logging import RichHandler

log = logging.getLogger("sepkit")


def init_logger(
    disable_rich: bool = False, debug: bool = False, log_file: str | None = None
) -> logging.handlers.QueueListener:
    formatter = logging.Formatter(
        "[{asctime}] {levelname} {name}: {message}", datefmt="%Y-%m-%d %H:%M:%S", style="{"
    )

    # handlers, console output goes to stderr so it never mixes with command output
    stream_handler: logging.Handler
    if disable_rich:
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
    else:
        stream_handler = RichHandler(console=Console(stderr=True), show_path=False)
    stream_handler.setLevel(logging.DEBUG if debug else logging.INFO)
    handlers: list[logging.Handler] = [stream_handler]

    # file handler
    if log_file:
        file_handler = logging.handlers.RotatingFileHandler(
            log_file, maxBytes=8**7, backupCount=8
        )
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    queue = Queue(-1)
    queue_handler = logging.handlers.QueueHandler(queue)

    root = logging.getLogger()
    for handler in [h for h in root.handlers if isinstance(h, logging.handlers.QueueHandler)]:
        root.removeHandler(handler)
    root.addHandler(queue_handler)
    root.setLevel(logging.INFO)
    log.setLevel(logging.DEBUG if debug else logging.INFO)

    queue_listener = logging.handlers.QueueListener(queue, *handlers)
    queue_listener.start()

    return queue_listener
