from .coherence import CoherenceResult, CoherenceSweep, WindowIndex, coherence_cv, select_topic_count
from .io import (TopicLabel, apply_topic_labels, default_labels, load_model, read_theta,
                 read_topic_labels, save_model, write_label_template, write_top_words)
from .lda import (LdaConfig, RobustnessReport, TopicModel, fit_lda, fit_many, log_likelihood,
                  recount, robustness_check, top_word_indices, top_words, topic_conditional)
