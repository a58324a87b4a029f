#pragma once

#include "sarcasm/common/error.hpp"
#include "sarcasm/common/format.hpp"
#include "sarcasm/common/hash.hpp"
#include "sarcasm/common/log.hpp"
#include "sarcasm/common/random.hpp"
#include "sarcasm/corpus.hpp"
#include "sarcasm/embed/fusion.hpp"
#include "sarcasm/embed/method.hpp"
#include "sarcasm/embed/paragraph_vector.hpp"
#include "sarcasm/embed/personality.hpp"
#include "sarcasm/embed/seq2seq.hpp"
#include "sarcasm/embed/temporal.hpp"
#include "sarcasm/embed/user_embedding.hpp"
#include "sarcasm/eval.hpp"
#include "sarcasm/models/classifier.hpp"
#include "sarcasm/models/siarn.hpp"
#include "sarcasm/models/trainer.hpp"
#include "sarcasm/nn/checkpoint.hpp"
#include "sarcasm/nn/layers.hpp"
#include "sarcasm/nn/optim.hpp"
#include "sarcasm/nn/tape.hpp"
#include "sarcasm/pipeline/commands.hpp"
#include "sarcasm/pipeline/config.hpp"
#include "sarcasm/pipeline/experiment.hpp"
#include "sarcasm/preprocess.hpp"
#include "sarcasm/split.hpp"
#include "sarcasm/synthetic.hpp"
