from .bundle import (
    TAGS_LEN,
    TITLE_LEN,
    FeatureBundle,
    FeatureExtractor,
    numeric_matrix,
    presence_matrix,
)
from .style import StyleFeaturizer, load_dictionary
from .text import (
    PorterStemmer,
    Vocabulary,
    build_vocab,
    encode_tags,
    encode_text,
    jaccard,
    tokenize,
    tokenize_and_stem,
)
from .thumbnail import (
    EMBEDDING_DIM,
    EmbeddingCache,
    HashEmbeddingProvider,
    InceptionV3Provider,
    embed_bytes,
    embed_thumbnail,
)

__all__ = [
    "TAGS_LEN",
    "TITLE_LEN",
    "FeatureBundle",
    "FeatureExtractor",
    "numeric_matrix",
    "presence_matrix",
    "StyleFeaturizer",
    "load_dictionary",
    "PorterStemmer",
    "Vocabulary",
    "build_vocab",
    "encode_tags",
    "encode_text",
    "jaccard",
    "tokenize",
    "tokenize_and_stem",
    "EMBEDDING_DIM",
    "EmbeddingCache",
    "HashEmbeddingProvider",
    "InceptionV3Provider",
    "embed_bytes",
    "embed_thumbnail",
]
