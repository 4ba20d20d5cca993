import logging

import uvicorn

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)

from multimon.config.settings import DEBUG, HOST, PORT  # noqa: E402
from multimon.service import app  # noqa: E402


def run():
    logging.info("Starting Multimon job service...")
    logging.info(f"Server will be available at: http://{HOST}:{PORT}")
    logging.info(f"API documentation: http://{HOST}:{PORT}/docs")

    if DEBUG:
        uvicorn.run("multimon.service:app", host=HOST, port=PORT, reload=True,
                    log_level="info", loop="asyncio", access_log=True)
    else:
        uvicorn.run(app, host=HOST, port=PORT, reload=False,
                    log_level="info", loop="asyncio", access_log=True)


if __name__ == "__main__":
    run()
