from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """Базовая неизменяемая схема доменных объектов"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class ReportSchema(BaseModel):
    """Базовая схема для сериализуемых отчётов"""
    model_config = ConfigDict(from_attributes=True)
