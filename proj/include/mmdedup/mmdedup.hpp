#pragma once

// Umbrella header: the whole library.

#include "mmdedup/baseline.hpp"
#include "mmdedup/csv.hpp"
#include "mmdedup/datagen.hpp"
#include "mmdedup/embedding.hpp"
#include "mmdedup/errors.hpp"
#include "mmdedup/features.hpp"
#include "mmdedup/fusion.hpp"
#include "mmdedup/linalg.hpp"
#include "mmdedup/pipeline.hpp"
#include "mmdedup/records.hpp"
#include "mmdedup/remote_embedding.hpp"
#include "mmdedup/rng.hpp"
#include "mmdedup/time_utc.hpp"
