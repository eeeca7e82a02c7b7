#pragma once

#include "gazeid/config.hpp"
#include "gazeid/error.hpp"
#include "gazeid/eval.hpp"
#include "gazeid/features.hpp"
#include "gazeid/gaze_data.hpp"
#include "gazeid/kmeans.hpp"
#include "gazeid/pipeline.hpp"
#include "gazeid/preprocess.hpp"
#include "gazeid/rbf.hpp"
#include "gazeid/segment.hpp"
#include "gazeid/selection.hpp"
#include "gazeid/stats.hpp"
#include "gazeid/synth.hpp"
