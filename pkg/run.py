#!/usr/bin/env python3
import uvicorn

import config

if __name__ == "__main__":
    # Autoreload only for local debugging
    reload = config.DEBUG and config.ENVIRONMENT != "production"

    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=config.PORT,
        reload=reload,
        log_level=config.LOG_LEVEL.lower(),
    )
