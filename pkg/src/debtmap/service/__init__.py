from debtmap.service.app import create_app
from debtmap.service.core import DebtService, ServiceError

__all__ = ["create_app", "DebtService", "ServiceError"]
