#pragma once

#include "speechbio/acoustic.hpp"
#include "speechbio/audio.hpp"
#include "speechbio/dataset.hpp"
#include "speechbio/embedding_io.hpp"
#include "speechbio/experiment.hpp"
#include "speechbio/features.hpp"
#include "speechbio/linguistic.hpp"
#include "speechbio/metrics.hpp"
#include "speechbio/models.hpp"
#include "speechbio/synthetic.hpp"
