from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="TREELEN_",
        case_sensitive=False,
        extra="ignore"
    )

    # Application Configuration
    app_name: str = "Tree Length Recovery"
    app_version: str = "0.1.0"
    log_level: str = "INFO"

    # Enumeration Caps
    max_exact_leaves: int = 10
    max_general_position_edges: int = 20
    max_enumeration_leaves: int = 10
    caterpillar_budget: int = 9

    # Parallelism
    jobs: int = 1

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        if isinstance(v, str):
            return v.strip().upper()
        return v

    @field_validator("jobs")
    @classmethod
    def at_least_one_job(cls, v: int) -> int:
        return max(1, v)


settings = Settings()
