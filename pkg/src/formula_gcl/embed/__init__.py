from .featurize import EDGE_DIM, FeaturedGraph, Featurizer, featurize
from .skipgram import TokenEmbedConfig, pair_loss_and_grads, sgd_pair_step, train_token_embeddings
from .table import EmbeddingTable, load_table, save_table, table_bytes, table_id, token_vector
from .vocab import Vocabulary, build_vocab, unigram_distribution
from .walks import corpus_walks, sample_walks

__all__ = [
    "EDGE_DIM",
    "EmbeddingTable",
    "FeaturedGraph",
    "Featurizer",
    "TokenEmbedConfig",
    "Vocabulary",
    "build_vocab",
    "corpus_walks",
    "featurize",
    "load_table",
    "pair_loss_and_grads",
    "sample_walks",
    "save_table",
    "table_bytes",
    "table_id",
    "sgd_pair_step",
    "token_vector",
    "train_token_embeddings",
    "unigram_distribution",
]
