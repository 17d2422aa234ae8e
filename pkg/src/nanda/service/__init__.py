from nanda.service.app import create_app
from nanda.service.config import ServiceConfig, load_config

__all__ = ["ServiceConfig", "create_app", "load_config"]
