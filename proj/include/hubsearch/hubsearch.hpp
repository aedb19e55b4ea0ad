#pragma once

#include "hubsearch/chrf.hpp"
#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/hubtrain.hpp"
#include "hubsearch/inverter.hpp"
#include "hubsearch/localsearch.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/metric_server.hpp"
#include "hubsearch/mini_metric.hpp"
#include "hubsearch/parallel.hpp"
#include "hubsearch/pipeline.hpp"
#include "hubsearch/protocol.hpp"
#include "hubsearch/remote.hpp"
#include "hubsearch/report.hpp"
#include "hubsearch/rng.hpp"
