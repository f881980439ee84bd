from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.core import get_settings, logger
from app.routes import analysis, codes
from app.schemas.decoder import DecoderName
from app.services.codes import CodeFamily
from app.services.coefficients import get_coefficient_service

settings = get_settings()


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Load the reference coefficients once so overhead requests fail fast if they are broken."""
    logger.info(f"Starting {settings.APP_NAME} ({settings.ENVIRONMENT}, debug={settings.DEBUG})")
    try:
        fits = get_coefficient_service().all()
        logger.info(f"Reference ansatz coefficients loaded for {', '.join(f.value for f in fits)}")
    except RuntimeError as e:
        logger.error(f"Overhead endpoints unavailable: {e}")

    yield

    logger.info("Shutting down")


app = FastAPI(
    title=settings.APP_NAME,
    description="Surface-code layouts, noise conversions and overhead estimates",
    version="0.1.0",
    debug=settings.DEBUG,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.get_cors_origins,
    allow_credentials=True,
    allow_methods=["GET"],
    allow_headers=["*"],
)

app.include_router(codes.router, prefix="/api")
app.include_router(analysis.router, prefix="/api")


@app.get("/")
async def root():
    """Service name and the code families and decoders this build knows."""
    return {
        "name": settings.APP_NAME,
        "environment": settings.ENVIRONMENT,
        "code_families": [f.value for f in CodeFamily],
        "decoders": [d.value for d in DecoderName],
    }


@app.get("/health")
async def health_check():
    return {"status": "ok"}
