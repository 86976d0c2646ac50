#pragma once

#include "parsitext/dataset.hpp"
#include "parsitext/ensemble.hpp"
#include "parsitext/error.hpp"
#include "parsitext/eval.hpp"
#include "parsitext/feature_selection.hpp"
#include "parsitext/features.hpp"
#include "parsitext/kmeans.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/pca.hpp"
#include "parsitext/pipeline.hpp"
#include "parsitext/random.hpp"
#include "parsitext/serialize.hpp"
#include "parsitext/text_norm.hpp"
#include "parsitext/tokenize.hpp"
#include "parsitext/utf8.hpp"
