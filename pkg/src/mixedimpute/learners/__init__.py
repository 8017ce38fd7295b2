from .bayes import NBModel, fit_nb, predict_nb
from .classifiers import CLASSIFIERS, make_classifier
from .heom import Neighbor, heom_distance, knn_classify, knn_query
from .linear import (LinearModel, fit_logistic, fit_ridge, logistic_gradient,
                     logistic_objective, predict_logistic)
from .tree import ForestModel, TreeModel, fit_forest, fit_tree, predict_forest, predict_tree
