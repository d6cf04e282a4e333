#pragma once

#include "flowgan/core/error.hpp"
#include "flowgan/core/rng.hpp"
#include "flowgan/lob/types.hpp"
#include "flowgan/lob/book.hpp"
#include "flowgan/lob/apply.hpp"
#include "flowgan/tokenize/vocabulary.hpp"
#include "flowgan/ingest/feed.hpp"
#include "flowgan/ingest/encode.hpp"
#include "flowgan/ingest/slicing.hpp"
#include "flowgan/ingest/empirical_sampler.hpp"
#include "flowgan/poisson/benchmark.hpp"
#include "flowgan/seqgan/adam.hpp"
#include "flowgan/seqgan/generator.hpp"
#include "flowgan/seqgan/discriminator.hpp"
#include "flowgan/seqgan/training.hpp"
#include "flowgan/seqgan/checkpoint.hpp"
#include "flowgan/simulate/materialize.hpp"
#include "flowgan/simulate/replay.hpp"
#include "flowgan/simulate/paths.hpp"
#include "flowgan/stats/tests.hpp"
#include "flowgan/stats/volatility.hpp"
#include "flowgan/stats/report.hpp"
#include "flowgan/synthetic/markov_flow.hpp"
#include "flowgan/io/files.hpp"
