from .aggregates import (TrendReport, TrendRow, average_topic_weight, largest_remainder, monthly_sentiment_rates,
                         top_k_topics_by_group)
from .charts import emit_charts
from .config import PipelineConfig, load_config
from .runner import Pipeline, run_pipeline
